#include "d2dalloc/greedy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace d2dalloc {

namespace {

// Effective SINR of occupant j of channel i under the hypothetical occupant
// sets (lc, ld): min rule for a cellular-mode D2D occupant, whose other hop
// is read from the current assignment.
double occupant_effective_sinr(const Scenario& s, const Assignment& partial,
                               ChannelId i, LinkMask lc, LinkMask ld,
                               LinkId j) {
    const bool x_j = mask_has(lc, j);
    const double xi = sinr(s, i, lc, ld, j, x_j);
    if (!s.is_d2d(j) || !x_j) return xi;
    double other = 0.0;
    for (ChannelId i2 : partial.channels_of(j)) {
        if (i2 == i) continue;
        const CoChannelSets cs2 = co_channel_sets(partial, i2);
        other += sinr(s, i2, cs2.lc, cs2.ld, j, true);
    }
    return std::min(xi, other);
}

// Weighted sum rate of the occupants, or nullopt when check_floors is set
// and someone misses their floor.
std::optional<double> occupants_value(const Scenario& s,
                                      const Assignment& partial, ChannelId i,
                                      LinkMask lc, LinkMask ld,
                                      bool check_floors) {
    double total = 0.0;
    for (LinkMask m = lc | ld; m != 0;) {
        const LinkId j = pop_lowest(m);
        const double eff = occupant_effective_sinr(s, partial, i, lc, ld, j);
        if (check_floors && eff < s.link(j).sinr_min) return std::nullopt;
        total += s.link(j).weight * std::log2(1.0 + eff);
    }
    return total;
}

int d2d_occupants(const Scenario& s, const CoChannelSets& cs) {
    return std::popcount((cs.lc | cs.ld) & s.d2d_links_mask());
}

int spare_channel_pairs(const Scenario& s) {
    return std::min(s.m_u - s.n_uc, s.m_d - s.n_dc);
}

// Unscaled cellular-mode gain (the spare-pair priority factor is applied by
// the caller): net change of the two channel values with the link counted
// once at its min-hop rate.
std::optional<double> cellular_mode_gain(const Scenario& s,
                                         const Assignment& partial,
                                         const Candidate& cand,
                                         const GreedyOptions& opts) {
    const LinkId j = cand.link;
    const CoChannelSets cu = co_channel_sets(partial, cand.up);
    const CoChannelSets cd = co_channel_sets(partial, cand.down);
    if (cu.lc != 0 || cd.lc != 0) return std::nullopt;
    if (opts.restrict_one_d2d_per_channel && (cu.ld != 0 || cd.ld != 0))
        return std::nullopt;

    const double xi_up = sinr(s, cand.up, link_bit(j), cu.ld, j, true);
    const double xi_dn = sinr(s, cand.down, link_bit(j), cd.ld, j, true);
    const double eff = std::min(xi_up, xi_dn);
    if (eff < s.link(j).sinr_min) return std::nullopt;

    double displaced = 0.0;
    for (LinkMask m = cu.ld; m != 0;) {
        const LinkId z = pop_lowest(m);
        const double xi = sinr(s, cand.up, link_bit(j), cu.ld, z, false);
        if (xi < s.link(z).sinr_min) return std::nullopt;
        displaced += s.link(z).weight * std::log2(1.0 + xi);
    }
    for (LinkMask m = cd.ld; m != 0;) {
        const LinkId z = pop_lowest(m);
        const double xi = sinr(s, cand.down, link_bit(j), cd.ld, z, false);
        if (xi < s.link(z).sinr_min) return std::nullopt;
        displaced += s.link(z).weight * std::log2(1.0 + xi);
    }

    const double r_j = s.link(j).weight * std::log2(1.0 + eff);
    const double old_up = channel_value(s, partial, cand.up, 0, cu.ld);
    const double old_dn = channel_value(s, partial, cand.down, 0, cd.ld);
    return r_j + displaced - old_up - old_dn;
}

std::optional<double> d2d_mode_gain(const Scenario& s,
                                    const Assignment& partial,
                                    const Candidate& cand,
                                    const GreedyOptions& opts) {
    const ChannelId i = cand.up != 0 ? cand.up : cand.down;
    const CoChannelSets cur = co_channel_sets(partial, i);
    if (opts.restrict_one_d2d_per_channel && d2d_occupants(s, cur) > 0)
        return std::nullopt;
    const std::optional<double> with = occupants_value(
        s, partial, i, cur.lc, cur.ld | link_bit(cand.link), true);
    if (!with) return std::nullopt;
    return *with - channel_value(s, partial, i, cur.lc, cur.ld);
}

}  // namespace

EdgeWeight cellular_edge_weight(const Scenario& s, ChannelId i, LinkId j) {
    if (!s.is_cellular(j))
        throw std::invalid_argument("cellular_edge_weight: not a cellular link");
    if (!placement_legal(s, j, true, i)) return std::nullopt;
    const TxRx own = tx_rx_nodes(s, j, true, i);
    const double snr =
        tx_power(s, j, true, i) * s.gain(i, own.tx, own.rx) / s.noise_w;
    if (snr < s.link(j).sinr_min) return std::nullopt;
    return s.link(j).weight * std::log2(1.0 + snr);
}

EdgeWeightTable cellular_edge_weights(const Scenario& s) {
    EdgeWeightTable table;
    table.channels = s.num_channels();
    table.cellular_links = s.num_cellular();
    table.t.resize(static_cast<std::size_t>(table.channels) *
                   table.cellular_links);
    for (ChannelId i = 1; i <= table.channels; ++i)
        for (LinkId j = 1; j <= table.cellular_links; ++j)
            table.at(i, j) = cellular_edge_weight(s, i, j);
    return table;
}

std::optional<KmOutcome> km_match(const EdgeWeightTable& table) {
    if (table.channels < table.cellular_links)
        throw std::invalid_argument("km_match: fewer channels than links");
    std::vector<std::vector<EdgeWeight>> w(
        static_cast<std::size_t>(table.cellular_links));
    for (LinkId j = 1; j <= table.cellular_links; ++j) {
        auto& row = w[static_cast<std::size_t>(j - 1)];
        row.reserve(static_cast<std::size_t>(table.channels));
        for (ChannelId i = 1; i <= table.channels; ++i)
            row.push_back(table.at(i, j));
    }
    const std::optional<MatchResult> res = max_weight_assignment(w);
    if (!res) return std::nullopt;
    KmOutcome out;
    out.total = res->total;
    for (LinkId j = 1; j <= table.cellular_links; ++j)
        out.pairs.emplace_back(res->row_to_col[static_cast<std::size_t>(j - 1)] + 1,
                               j);
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
}

double channel_value(const Scenario& s, const Assignment& partial,
                     ChannelId i, LinkMask lc, LinkMask ld) {
    return *occupants_value(s, partial, i, lc, ld, false);
}

std::optional<double> priority_value(const Scenario& s,
                                     const Assignment& partial,
                                     const Candidate& cand,
                                     int unassigned_d2d,
                                     const GreedyOptions& opts) {
    if (!s.is_d2d(cand.link))
        throw std::invalid_argument("priority_value: not a D2D link");
    if (partial.active(cand.link))
        throw std::invalid_argument("priority_value: link already assigned");
    if (!cand.cellular_mode) {
        if ((cand.up != 0) == (cand.down != 0))
            throw std::invalid_argument(
                "priority_value: D2D mode names exactly one channel");
        return d2d_mode_gain(s, partial, cand, opts);
    }
    if (cand.up == 0 || cand.down == 0)
        throw std::invalid_argument(
            "priority_value: cellular mode names both channels");
    const int spare = spare_channel_pairs(s);
    if (spare <= 0) return std::nullopt;
    const std::optional<double> gain =
        cellular_mode_gain(s, partial, cand, opts);
    if (!gain) return std::nullopt;
    const double factor =
        std::min(1.0, static_cast<double>(unassigned_d2d) / spare);
    return factor * *gain;
}

SolveResult greedy_solve(const Scenario& s, const GreedyOptions& opts) {
    s.validate();
    const auto start = std::chrono::steady_clock::now();
    SolveResult result;
    std::uint64_t evals = 0;

    const std::optional<KmOutcome> match = km_match(cellular_edge_weights(s));
    if (!match) {
        result.assignment = Assignment::empty_for(s);
        result.feasible = false;
        result.stats.wall_time_ms =
            std::chrono::duration<double, std::milli>(
                std::chrono::steady_clock::now() - start)
                .count();
        return result;
    }

    Assignment a = Assignment::empty_for(s);
    for (const auto& [i, j] : match->pairs) a.set(i, j);

    const int nc = s.num_cellular();
    const int m = s.num_channels();
    const int spare = spare_channel_pairs(s);
    LinkMask unassigned = s.d2d_links_mask();

    // Cached gains; cellular-mode entries are stored unscaled because the
    // priority factor moves with |unassigned| on every admission.
    std::vector<std::optional<double>> v_d2d(
        static_cast<std::size_t>(s.n_d) * m);
    std::vector<std::optional<double>> v_cell(
        static_cast<std::size_t>(s.n_d) * s.m_u * s.m_d);
    auto d2d_slot = [&](LinkId j, ChannelId i) -> std::optional<double>& {
        return v_d2d[static_cast<std::size_t>(j - nc - 1) * m + (i - 1)];
    };
    auto cell_slot = [&](LinkId j, ChannelId u,
                         ChannelId d) -> std::optional<double>& {
        return v_cell[(static_cast<std::size_t>(j - nc - 1) * s.m_u +
                       (u - 1)) *
                          s.m_d +
                      (d - s.m_u - 1)];
    };

    auto refresh_link = [&](LinkId j, const std::vector<char>& touched) {
        for (ChannelId i = 1; i <= m; ++i) {
            if (!touched[static_cast<std::size_t>(i)]) continue;
            Candidate c;
            c.link = j;
            (s.is_uplink_channel(i) ? c.up : c.down) = i;
            ++evals;
            d2d_slot(j, i) = d2d_mode_gain(s, a, c, opts);
        }
        if (spare <= 0) return;
        for (ChannelId u = 1; u <= s.m_u; ++u) {
            for (ChannelId d = s.m_u + 1; d <= m; ++d) {
                if (!touched[static_cast<std::size_t>(u)] &&
                    !touched[static_cast<std::size_t>(d)])
                    continue;
                ++evals;
                cell_slot(j, u, d) =
                    cellular_mode_gain(s, a, {u, d, j, true}, opts);
            }
        }
    };

    std::vector<char> touched(static_cast<std::size_t>(m) + 1, 1);
    for (LinkMask mm = unassigned; mm != 0;) refresh_link(pop_lowest(mm), touched);

    while (unassigned != 0) {
        const double factor =
            spare > 0 ? std::min(1.0, static_cast<double>(
                                          std::popcount(unassigned)) /
                                          spare)
                      : 0.0;
        bool found = false;
        double best_value = 0.0;
        Candidate best;
        auto consider = [&](double value, const Candidate& c) {
            if (value <= 0.0) return;
            const auto key = std::make_tuple(c.cellular_mode, c.link, c.up,
                                             c.down);
            const auto best_key = std::make_tuple(best.cellular_mode,
                                                  best.link, best.up,
                                                  best.down);
            if (!found || value > best_value ||
                (value == best_value && key < best_key)) {
                found = true;
                best_value = value;
                best = c;
            }
        };
        for (LinkMask mm = unassigned; mm != 0;) {
            const LinkId j = pop_lowest(mm);
            for (ChannelId i = 1; i <= m; ++i) {
                if (const auto& v = d2d_slot(j, i)) {
                    Candidate c;
                    c.link = j;
                    (s.is_uplink_channel(i) ? c.up : c.down) = i;
                    consider(*v, c);
                }
            }
            if (spare <= 0) continue;
            for (ChannelId u = 1; u <= s.m_u; ++u)
                for (ChannelId d = s.m_u + 1; d <= m; ++d)
                    if (const auto& v = cell_slot(j, u, d))
                        consider(factor * *v, {u, d, j, true});
        }
        if (!found) break;

        std::fill(touched.begin(), touched.end(), 0);
        if (best.cellular_mode) {
            a.set(best.up, best.link);
            a.set(best.down, best.link);
            a.set_mode(best.link, true);
            touched[static_cast<std::size_t>(best.up)] = 1;
            touched[static_cast<std::size_t>(best.down)] = 1;
        } else {
            const ChannelId i = std::max(best.up, best.down);
            a.set(i, best.link);
            touched[static_cast<std::size_t>(i)] = 1;
            // A cellular-mode occupant of this channel has its min rate tied
            // to its other hop; values naming that hop went stale too.
            const CoChannelSets cs = co_channel_sets(a, i);
            for (LinkMask mm = cs.lc & s.d2d_links_mask(); mm != 0;) {
                const LinkId z = pop_lowest(mm);
                for (ChannelId i2 : a.channels_of(z))
                    touched[static_cast<std::size_t>(i2)] = 1;
            }
        }
        unassigned &= ~link_bit(best.link);
        for (LinkMask mm = unassigned; mm != 0;)
            refresh_link(pop_lowest(mm), touched);
    }

    if (!check_feasible(s, a).ok())
        throw std::logic_error(
            "greedy_solve: produced an infeasible assignment");

    result.assignment = a;
    result.feasible = true;
    result.objective = objective(s, a);
    result.per_link_rate.resize(static_cast<std::size_t>(s.num_links()));
    for (LinkId j = 1; j <= s.num_links(); ++j)
        result.per_link_rate[static_cast<std::size_t>(j - 1)] =
            link_rate(s, a, j);
    result.stats.decisions_enumerated = evals;
    result.stats.wall_time_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - start)
            .count();
    return result;
}

}  // namespace d2dalloc
