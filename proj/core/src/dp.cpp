#include "d2dalloc/dp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

namespace d2dalloc {

namespace {

constexpr double kValueTol = 1e-12;  // tie window inside the recursion
constexpr double kVerifyTol = 1e-9;

// Lexicographic order on the ascending element lists of two bit masks
// ({1,3} < {2} because the lists [1,3] and [2] compare element-wise).
bool mask_lex_less(std::uint64_t a, std::uint64_t b) {
    while (a != 0 && b != 0) {
        const int ea = std::countr_zero(a);
        const int eb = std::countr_zero(b);
        if (ea != eb) return ea < eb;
        a &= a - 1;
        b &= b - 1;
    }
    return a == 0 && b != 0;  // a proper prefix sorts first
}

// Per-channel lookup tables for the hot SINR evaluations: the direct-term
// numerator of every legal (channel, link, mode) placement and the received
// interference power of every legal (interferer, victim) pairing.
struct SinrTables {
    int n = 0;
    int m = 0;
    double noise = 0.0;
    std::vector<double> direct;  // [((i-1)*n + (j-1))*2 + x], -1 if illegal
    std::vector<double> cross;   // [(((i-1)*n + (z-1))*2 + xz)*2n + (j-1)*2 + xj]

    static SinrTables build(const Scenario& s) {
        SinrTables t;
        t.n = s.num_links();
        t.m = s.num_channels();
        t.noise = s.noise_w;
        const std::size_t nn = static_cast<std::size_t>(t.n);
        t.direct.assign(static_cast<std::size_t>(t.m) * nn * 2, -1.0);
        t.cross.assign(static_cast<std::size_t>(t.m) * nn * 2 * nn * 2, 0.0);
        for (ChannelId i = 1; i <= t.m; ++i) {
            for (LinkId j = 1; j <= t.n; ++j) {
                for (int x = 0; x <= 1; ++x) {
                    if (!placement_legal(s, j, x != 0, i)) continue;
                    const TxRx own = tx_rx_nodes(s, j, x != 0, i);
                    t.direct[t.direct_idx(i, j, x)] =
                        tx_power(s, j, x != 0, i) * s.gain(i, own.tx, own.rx);
                    for (LinkId z = 1; z <= t.n; ++z) {
                        for (int xz = 0; xz <= 1; ++xz) {
                            if (z == j || !placement_legal(s, z, xz != 0, i))
                                continue;
                            const TxRx zt = tx_rx_nodes(s, z, xz != 0, i);
                            t.cross[t.cross_idx(i, z, xz, j, x)] =
                                tx_power(s, z, xz != 0, i) *
                                s.gain(i, zt.tx, own.rx);
                        }
                    }
                }
            }
        }
        return t;
    }

    std::size_t direct_idx(ChannelId i, LinkId j, int x) const {
        return (static_cast<std::size_t>(i - 1) * n + (j - 1)) * 2 +
               static_cast<std::size_t>(x);
    }
    std::size_t cross_idx(ChannelId i, LinkId z, int xz, LinkId j,
                          int xj) const {
        return ((static_cast<std::size_t>(i - 1) * n + (z - 1)) * 2 +
                static_cast<std::size_t>(xz)) *
                   (static_cast<std::size_t>(n) * 2) +
               static_cast<std::size_t>(j - 1) * 2 +
               static_cast<std::size_t>(xj);
    }
    double direct_at(ChannelId i, LinkId j, int x) const {
        return direct[direct_idx(i, j, x)];
    }
    double cross_at(ChannelId i, LinkId z, int xz, LinkId j, int xj) const {
        return cross[cross_idx(i, z, xz, j, xj)];
    }
};

enum class Status : std::uint8_t {
    kUnvisited = 0,
    kInfeasible,
    kLeaf,      // feasible base case, nothing to reconstruct
    kDecision,  // feasible with a stored best decision
};

struct Entry {
    double value = 0.0;
    DpDecision best;
    Status status = Status::kUnvisited;
};

// A channel evaluation: weighted rates of all occupants except one optional
// deferred link (the cellular-mode D2D occupant, whose rate needs the other
// hop), floor checks applied to everyone else.
struct ChannelEval {
    double sum_rate = 0.0;
    double deferred_xi = 0.0;
    bool feasible = true;
};

class DpEngine {
  public:
    DpEngine(const Scenario& s, const DpOptions& opts)
        : s_(s), opts_(opts), tables_(SinrTables::build(s)) {
        n_ = s.num_links();
        z_bits_ = s.m_d;
        if (n_ + z_bits_ + 7 > 63)
            throw BudgetError("dp_solve: state space cannot be indexed",
                              std::ldexp(1.0, n_ + z_bits_));
        const LinkMask all = s.all_links_mask();
        ulc_mask_ = (n_uc() > 0) ? (LinkMask{1} << n_uc()) - 1 : 0;
        dlc_mask_ = ((n_c() > 0) ? (LinkMask{1} << n_c()) - 1 : 0) & ~ulc_mask_;
        d2d_mask_ = all & ~(ulc_mask_ | dlc_mask_);
        full_z_ = z_bits_ > 0 ? (ChannelMask{1} << z_bits_) - 1 : 0;

        slots_per_stage_ = std::uint64_t{1} << (n_ + z_bits_);
        const std::uint64_t total =
            slots_per_stage_ * static_cast<std::uint64_t>(s.m_u + 1);
        dense_ = total <= kDenseLimit;
        if (dense_) dense_memo_.resize(total);

        for (LinkId j = 1; j <= n_; ++j) {
            floors_[static_cast<std::size_t>(j)] = s.link(j).sinr_min;
            weights_[static_cast<std::size_t>(j)] = s.link(j).weight;
        }
    }

    Utility solve(int k, LinkMask links, ChannelMask down) {
        Entry& e = slot(k, links, down);
        if (e.status == Status::kUnvisited) {
            if (k == 0)
                compute_stage0(e, links, down);
            else
                compute_stage(e, k, links, down);
            ++states_;
            if (states_ > opts_.state_budget)
                throw BudgetError(
                    "dp_solve: visited states exceed the budget of " +
                        std::to_string(opts_.state_budget),
                    static_cast<double>(states_));
        }
        if (e.status == Status::kInfeasible) return std::nullopt;
        return e.value;
    }

    Assignment reconstruct() {
        Assignment a = Assignment::empty_for(s_);
        LinkMask links = s_.all_links_mask();
        ChannelMask down = full_z_;
        for (int k = s_.m_u; k >= 1; --k) {
            const Entry& e = existing(k, links, down);
            const DpDecision& dec = e.best;
            for (LinkMask m = dec.cs; m != 0;) {
                const LinkId j = pop_lowest(m);
                a.set(k, j);
                if (mask_has(d2d_mask_, j)) {
                    a.set_mode(j, true);
                    a.set(dec.down_channel, j);
                }
            }
            for (LinkMask m = dec.dsu; m != 0;) a.set(k, pop_lowest(m));
            for (LinkMask m = dec.dsd; m != 0;)
                a.set(dec.down_channel, pop_lowest(m));
            links &= ~(dec.cs | dec.dsu | dec.dsd);
            if (dec.down_channel != 0) down &= ~z_bit(dec.down_channel);
        }
        reconstruct_stage0(a, links, down);
        return a;
    }

    void reconstruct_stage0(Assignment& a, LinkMask links, ChannelMask down) {
        while (down != 0) {
            const Entry& e = existing(0, links, down);
            const DpDecision& dec = e.best;
            for (LinkMask m = dec.cs | dec.dsd; m != 0;)
                a.set(dec.down_channel, pop_lowest(m));
            links &= ~(dec.cs | dec.dsd);
            down &= ~z_bit(dec.down_channel);
        }
    }

    std::uint64_t states() const { return states_; }
    std::uint64_t decisions() const { return decisions_; }

  private:
    static constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 21;

    int n_uc() const { return s_.n_uc; }
    int n_c() const { return s_.num_cellular(); }

    ChannelMask z_bit(ChannelId d) const {
        return ChannelMask{1} << (d - s_.m_u - 1);
    }
    ChannelId z_channel(int bit) const { return s_.m_u + 1 + bit; }

    std::uint64_t key(int k, LinkMask links, ChannelMask down) const {
        return static_cast<std::uint64_t>(k) * slots_per_stage_ +
               ((static_cast<std::uint64_t>(down) << n_) | links);
    }

    Entry& slot(int k, LinkMask links, ChannelMask down) {
        const std::uint64_t id = key(k, links, down);
        if (dense_) return dense_memo_[id];
        return sparse_memo_[id];
    }

    const Entry& existing(int k, LinkMask links, ChannelMask down) {
        const Entry& e = slot(k, links, down);
        if (e.status == Status::kUnvisited || e.status == Status::kInfeasible)
            throw std::logic_error("dp_solve: reconstruction hit a state "
                                   "without a stored decision");
        return e;
    }

    double floor_of(LinkId j) const {
        return floors_[static_cast<std::size_t>(j)];
    }
    double weight_of(LinkId j) const {
        return weights_[static_cast<std::size_t>(j)];
    }

    ChannelEval eval_channel(ChannelId i, LinkMask lc, LinkMask ld,
                             LinkId deferred) const {
        ChannelEval out;
        LinkId ids[64];
        int modes[64];
        int cnt = 0;
        for (LinkMask m = lc; m != 0;) {
            ids[cnt] = pop_lowest(m);
            modes[cnt++] = 1;
        }
        for (LinkMask m = ld; m != 0;) {
            ids[cnt] = pop_lowest(m);
            modes[cnt++] = 0;
        }
        for (int a = 0; a < cnt; ++a) {
            double denom = tables_.noise;
            for (int b = 0; b < cnt; ++b) {
                if (b == a) continue;
                denom += tables_.cross_at(i, ids[b], modes[b], ids[a], modes[a]);
            }
            const double xi = tables_.direct_at(i, ids[a], modes[a]) / denom;
            if (ids[a] == deferred) {
                out.deferred_xi = xi;
                continue;
            }
            if (xi < floor_of(ids[a])) {
                out.feasible = false;
                return out;
            }
            out.sum_rate += weight_of(ids[a]) * std::log2(1.0 + xi);
        }
        return out;
    }

    void compute_stage(Entry& e, int k, LinkMask links, ChannelMask down) {
        const LinkMask dd = links & d2d_mask_;
        const LinkMask ulc = links & ulc_mask_;
        const int z_count = std::popcount(down);
        const bool force_cellular = k <= std::popcount(ulc);
        const bool allow_d2d_cs =
            !opts_.force_d2d_mode_only && !force_cellular && z_count > 0 &&
            std::popcount(links & dlc_mask_) != z_count;

        bool have_best = false;
        double best_value = 0.0;
        DpDecision best_dec;
        auto consider = [&](double value, const DpDecision& dec) {
            if (!have_best || value > best_value + kValueTol) {
                have_best = true;
                best_value = value;
                best_dec = dec;
            } else if (value >= best_value - kValueTol &&
                       decision_less(dec, best_dec)) {
                best_value = value;
                best_dec = dec;
            }
        };

        auto try_cs = [&](LinkMask cs) {
            const LinkId cs_link = cs != 0 ? std::countr_zero(cs) + 1 : 0;
            const bool cs_is_d2d = cs != 0 && mask_has(d2d_mask_, cs_link);
            const LinkMask rest = dd & ~cs;
            for (LinkMask dsu = rest;;) {
                const ChannelEval up =
                    eval_channel(k, cs, dsu, cs_is_d2d ? cs_link : 0);
                // min(uplink hop, downlink hop) cannot reach the floor once
                // the uplink hop is below it, so either QoS reading rejects.
                const bool up_ok =
                    up.feasible &&
                    (!cs_is_d2d || up.deferred_xi >= floor_of(cs_link));
                if (!cs_is_d2d) {
                    ++decisions_;
                    if (up_ok) {
                        const Utility child =
                            solve(k - 1, links & ~(cs | dsu), down);
                        if (child)
                            consider(up.sum_rate + *child,
                                     DpDecision{cs, dsu, 0, 0});
                    }
                } else if (!up_ok) {
                    decisions_ += static_cast<std::uint64_t>(z_count)
                                  << std::popcount(rest & ~dsu);
                } else {
                    const LinkMask rest2 = rest & ~dsu;
                    for (ChannelMask zm = down; zm != 0;) {
                        const int bit = std::countr_zero(zm);
                        zm &= zm - 1;
                        const ChannelId d = z_channel(bit);
                        for (LinkMask dsd = rest2;;) {
                            ++decisions_;
                            const ChannelEval dn =
                                eval_channel(d, cs, dsd, cs_link);
                            const double eff =
                                std::min(up.deferred_xi, dn.deferred_xi);
                            const bool dn_ok =
                                dn.feasible &&
                                (opts_.per_hop_qos
                                     ? dn.deferred_xi >= floor_of(cs_link)
                                     : eff >= floor_of(cs_link));
                            if (dn_ok) {
                                const Utility child =
                                    solve(k - 1, links & ~(cs | dsu | dsd),
                                          down & ~z_bit(d));
                                if (child) {
                                    const double u =
                                        up.sum_rate + dn.sum_rate +
                                        weight_of(cs_link) *
                                            std::log2(1.0 + eff);
                                    consider(u + *child,
                                             DpDecision{cs, dsu, d, dsd});
                                }
                            }
                            if (dsd == 0) break;
                            dsd = (dsd - 1) & rest2;
                        }
                    }
                }
                if (dsu == 0) break;
                dsu = (dsu - 1) & rest;
            }
        };

        if (force_cellular) {
            for (LinkMask m = ulc; m != 0;) {
                const LinkId j = pop_lowest(m);
                try_cs(link_bit(j));
            }
        } else {
            try_cs(0);
            for (LinkMask m = ulc; m != 0;) {
                const LinkId j = pop_lowest(m);
                try_cs(link_bit(j));
            }
            if (allow_d2d_cs) {
                for (LinkMask m = dd; m != 0;) {
                    const LinkId j = pop_lowest(m);
                    try_cs(link_bit(j));
                }
            }
        }

        if (have_best) {
            e.value = best_value;
            e.best = best_dec;
            e.status = Status::kDecision;
        } else {
            e.status = Status::kInfeasible;
        }
    }

    void compute_stage0(Entry& e, LinkMask links, ChannelMask down) {
        if ((links & ulc_mask_) != 0) {
            // No uplink channel remains, so an uplink cellular link can
            // never be served from here.
            e.status = Status::kInfeasible;
            return;
        }
        if (down == 0) {
            if ((links & dlc_mask_) != 0) {
                e.status = Status::kInfeasible;
            } else {
                e.value = 0.0;  // leftover D2D links stay inactive
                e.status = Status::kLeaf;
            }
            return;
        }

        const ChannelId d = z_channel(63 - std::countl_zero(down));
        const LinkMask dd = links & d2d_mask_;
        const ChannelMask down_rest = down & ~z_bit(d);

        bool have_best = false;
        double best_value = 0.0;
        DpDecision best_dec;
        auto consider = [&](double value, const DpDecision& dec) {
            if (!have_best || value > best_value + kValueTol) {
                have_best = true;
                best_value = value;
                best_dec = dec;
            } else if (value >= best_value - kValueTol &&
                       decision_less(dec, best_dec)) {
                best_value = value;
                best_dec = dec;
            }
        };

        auto try_cs = [&](LinkMask cs) {
            for (LinkMask dsd = dd;;) {
                ++decisions_;
                const ChannelEval ev = eval_channel(d, cs, dsd, 0);
                if (ev.feasible) {
                    const Utility child =
                        solve(0, links & ~(cs | dsd), down_rest);
                    if (child)
                        consider(ev.sum_rate + *child,
                                 DpDecision{cs, 0, d, dsd});
                }
                if (dsd == 0) break;
                dsd = (dsd - 1) & dd;
            }
        };

        try_cs(0);
        for (LinkMask m = links & dlc_mask_; m != 0;) {
            const LinkId j = pop_lowest(m);
            try_cs(link_bit(j));
        }

        if (have_best) {
            e.value = best_value;
            e.best = best_dec;
            e.status = Status::kDecision;
        } else {
            e.status = Status::kInfeasible;
        }
    }

    const Scenario& s_;
    DpOptions opts_;
    SinrTables tables_;
    int n_ = 0;
    int z_bits_ = 0;
    LinkMask ulc_mask_ = 0, dlc_mask_ = 0, d2d_mask_ = 0;
    ChannelMask full_z_ = 0;
    std::uint64_t slots_per_stage_ = 0;
    bool dense_ = false;
    std::vector<Entry> dense_memo_;
    std::unordered_map<std::uint64_t, Entry> sparse_memo_;
    std::uint64_t states_ = 0;
    std::uint64_t decisions_ = 0;
    double floors_[65] = {};
    double weights_[65] = {};
};

}  // namespace

bool decision_less(const DpDecision& a, const DpDecision& b) {
    if (a.cs != b.cs) return mask_lex_less(a.cs, b.cs);
    if (a.dsu != b.dsu) return mask_lex_less(a.dsu, b.dsu);
    if (a.down_channel != b.down_channel)
        return a.down_channel < b.down_channel;
    if (a.dsd != b.dsd) return mask_lex_less(a.dsd, b.dsd);
    return false;
}

Utility share_utility(const Scenario& s, ChannelId k, const DpDecision& dec,
                      bool per_hop_qos) {
    if (!s.is_uplink_channel(k))
        throw std::invalid_argument("share_utility: k must be an uplink channel");
    const LinkMask cs_d2d = dec.cs & s.d2d_links_mask();
    if ((cs_d2d != 0) != (dec.down_channel != 0))
        throw std::invalid_argument(
            "share_utility: a downlink channel pairs with a cellular-mode "
            "D2D occupant and only with one");
    if (dec.down_channel != 0 && !s.is_downlink_channel(dec.down_channel))
        throw std::invalid_argument("share_utility: bad downlink channel");
    if (dec.down_channel == 0 && dec.dsd != 0)
        throw std::invalid_argument("share_utility: dsd without a channel");

    double total = 0.0;
    for (LinkMask m = dec.cs | dec.dsu; m != 0;) {
        const LinkId j = pop_lowest(m);
        const bool x_j = mask_has(dec.cs, j);
        const double xi_up = sinr(s, k, dec.cs, dec.dsu, j, x_j);
        if (s.is_d2d(j) && x_j) {
            const double xi_down =
                sinr(s, dec.down_channel, cs_d2d, dec.dsd, j, true);
            const double eff = std::min(xi_up, xi_down);
            const bool ok = per_hop_qos
                                ? (xi_up >= s.link(j).sinr_min &&
                                   xi_down >= s.link(j).sinr_min)
                                : eff >= s.link(j).sinr_min;
            if (!ok) return std::nullopt;
            total += s.link(j).weight * std::log2(1.0 + eff);
        } else {
            if (xi_up < s.link(j).sinr_min) return std::nullopt;
            total += s.link(j).weight * std::log2(1.0 + xi_up);
        }
    }
    for (LinkMask m = dec.dsd; m != 0;) {
        const LinkId j = pop_lowest(m);
        const double xi = sinr(s, dec.down_channel, cs_d2d, dec.dsd, j, false);
        if (xi < s.link(j).sinr_min) return std::nullopt;
        total += s.link(j).weight * std::log2(1.0 + xi);
    }
    return total;
}

std::vector<DpDecision> enumerate_decisions(const Scenario& s, ChannelId k,
                                            const DpState& state,
                                            const DpOptions& opts) {
    if (!s.is_uplink_channel(k))
        throw std::invalid_argument(
            "enumerate_decisions: k must be an uplink channel");
    const LinkMask links = state.links;
    const LinkMask dd = links & s.d2d_links_mask();
    LinkMask ulc = 0, dlc = 0;
    for (LinkId j = 1; j <= s.num_cellular(); ++j)
        if (mask_has(links, j))
            (s.is_uplink_cellular(j) ? ulc : dlc) |= link_bit(j);
    const int z_count = std::popcount(state.down_channels);
    const bool force_cellular = k <= std::popcount(ulc);
    const bool allow_d2d_cs = !opts.force_d2d_mode_only && !force_cellular &&
                              std::popcount(dlc) != z_count;

    std::vector<LinkMask> cs_options;
    if (!force_cellular) cs_options.push_back(0);
    for (LinkMask m = ulc; m != 0;) cs_options.push_back(link_bit(pop_lowest(m)));
    if (allow_d2d_cs)
        for (LinkMask m = dd; m != 0;) cs_options.push_back(link_bit(pop_lowest(m)));

    std::vector<DpDecision> out;
    for (const LinkMask cs : cs_options) {
        const bool cs_is_d2d = (cs & s.d2d_links_mask()) != 0;
        const LinkMask rest = dd & ~cs;
        for (LinkMask dsu = rest;;) {
            if (!cs_is_d2d) {
                out.push_back({cs, dsu, 0, 0});
            } else {
                for (ChannelMask zm = state.down_channels; zm != 0;) {
                    const int bit = std::countr_zero(zm);
                    zm &= zm - 1;
                    const ChannelId d = s.m_u + 1 + bit;
                    const LinkMask rest2 = rest & ~dsu;
                    for (LinkMask dsd = rest2;;) {
                        out.push_back({cs, dsu, d, dsd});
                        if (dsd == 0) break;
                        dsd = (dsd - 1) & rest2;
                    }
                }
            }
            if (dsu == 0) break;
            dsu = (dsu - 1) & rest;
        }
    }

    std::erase_if(out, [&](const DpDecision& dec) {
        return !share_utility(s, k, dec, opts.per_hop_qos).has_value();
    });
    std::sort(out.begin(), out.end(),
              [](const DpDecision& a, const DpDecision& b) {
                  return decision_less(a, b);
              });
    return out;
}

std::pair<Utility, Assignment> stage0_solve(const Scenario& s, LinkMask links,
                                            ChannelMask down_channels) {
    s.validate();
    DpEngine engine(s, DpOptions{});
    const Utility value = engine.solve(0, links, down_channels);
    Assignment fragment = Assignment::empty_for(s);
    if (value) engine.reconstruct_stage0(fragment, links, down_channels);
    return {value, fragment};
}

std::uint64_t dp_state_bound(const Scenario& s) {
    const int bits = s.num_links() + s.m_d;
    if (bits >= 62) return std::uint64_t{1} << 62;
    const std::uint64_t per_stage = std::uint64_t{1} << bits;
    const std::uint64_t stages = static_cast<std::uint64_t>(s.m_u) + 1;
    if (per_stage > (std::uint64_t{1} << 62) / stages)
        return std::uint64_t{1} << 62;
    return stages * per_stage;
}

bool dp_state_count_check(const Scenario& s, const SolveStats& stats) {
    return stats.states_visited <= dp_state_bound(s);
}

SolveResult dp_solve(const Scenario& s, const DpOptions& opts) {
    s.validate();
    const auto start = std::chrono::steady_clock::now();
    DpEngine engine(s, opts);
    const ChannelMask full_z =
        s.m_d > 0 ? (ChannelMask{1} << s.m_d) - 1 : 0;
    const Utility top = engine.solve(s.m_u, s.all_links_mask(), full_z);

    SolveResult result;
    result.stats.states_visited = engine.states();
    result.stats.decisions_enumerated = engine.decisions();
    result.stats.state_bound_ok = dp_state_count_check(s, result.stats);

    if (!top) {
        result.assignment = Assignment::empty_for(s);
        result.feasible = false;
    } else {
        result.assignment = engine.reconstruct();
        if (!check_feasible(s, result.assignment).ok())
            throw std::logic_error(
                "dp_solve: reconstructed assignment failed the feasibility "
                "check");
        const double recomputed = objective(s, result.assignment);
        if (std::fabs(recomputed - *top) > kVerifyTol)
            throw std::logic_error(
                "dp_solve: reconstructed objective deviates from the "
                "recursion value");
        result.feasible = true;
        result.objective = recomputed;
        result.per_link_rate.resize(static_cast<std::size_t>(s.num_links()));
        for (LinkId j = 1; j <= s.num_links(); ++j)
            result.per_link_rate[static_cast<std::size_t>(j - 1)] =
                link_rate(s, result.assignment, j);
    }
    result.stats.wall_time_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - start)
            .count();
    return result;
}

}  // namespace d2dalloc
