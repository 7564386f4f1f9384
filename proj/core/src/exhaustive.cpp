#include "d2dalloc/exhaustive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace d2dalloc {

namespace {

double falling_factorial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double out = 1.0;
    for (int t = 0; t < k; ++t) out *= n - t;
    return out;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double out = 1.0;
    for (int t = 1; t <= k; ++t) out = out * (n - k + t) / t;
    return out;
}

// Canonical form used for deterministic tie-breaking among equal-value
// assignments.
struct TieKey {
    std::vector<std::pair<ChannelId, LinkId>> rho;
    std::vector<LinkId> x;

    static TieKey of(const Scenario& s, const Assignment& a) {
        TieKey k;
        for (ChannelId i = 1; i <= s.num_channels(); ++i)
            for (LinkMask m = a.on_channel[static_cast<std::size_t>(i - 1)];
                 m != 0;)
                k.rho.emplace_back(i, pop_lowest(m));
        for (LinkMask m = a.cellular_mode; m != 0;) k.x.push_back(pop_lowest(m));
        return k;
    }

    bool operator<(const TieKey& o) const {
        if (rho != o.rho) return rho < o.rho;
        return x < o.x;
    }
};

struct Enumerator {
    const Scenario& s;
    const EnumOptions& opts;
    Assignment current;
    std::vector<char> x1_taken;   // per channel: an x=1 occupant present
    std::vector<int> d2d_count;   // per channel: D2D occupants (either mode)
    std::uint64_t leaves = 0;

    bool have_best = false;
    double best_value = 0.0;
    Assignment best_assignment;
    TieKey best_key;

    explicit Enumerator(const Scenario& scn, const EnumOptions& o)
        : s(scn), opts(o), current(Assignment::empty_for(scn)),
          x1_taken(static_cast<std::size_t>(scn.num_channels()), 0),
          d2d_count(static_cast<std::size_t>(scn.num_channels()), 0) {}

    void leaf() {
        ++leaves;
        if (!check_feasible(s, current).ok()) return;
        const double value = objective(s, current);
        if (!have_best || value > best_value) {
            have_best = true;
            best_value = value;
            best_assignment = current;
            best_key = TieKey::of(s, current);
            return;
        }
        if (value == best_value) {
            TieKey key = TieKey::of(s, current);
            if (key < best_key) {
                best_assignment = current;
                best_key = std::move(key);
            }
        }
    }

    bool channel_open_for_d2d(ChannelId i) const {
        return !opts.restrict_one_d2d_per_channel ||
               d2d_count[static_cast<std::size_t>(i - 1)] == 0;
    }

    void place(ChannelId i, LinkId j, bool take_x1) {
        current.set(i, j);
        if (take_x1) x1_taken[static_cast<std::size_t>(i - 1)] = 1;
        if (s.is_d2d(j)) ++d2d_count[static_cast<std::size_t>(i - 1)];
    }
    void unplace(ChannelId i, LinkId j, bool take_x1) {
        current.on_channel[static_cast<std::size_t>(i - 1)] &= ~link_bit(j);
        if (take_x1) x1_taken[static_cast<std::size_t>(i - 1)] = 0;
        if (s.is_d2d(j)) --d2d_count[static_cast<std::size_t>(i - 1)];
    }

    void recurse(LinkId j) {
        if (j > s.num_links()) {
            leaf();
            return;
        }
        if (s.is_cellular(j)) {
            const bool uplink = s.is_uplink_cellular(j);
            for (ChannelId i = 1; i <= s.num_channels(); ++i) {
                if (s.is_uplink_channel(i) != uplink) continue;
                if (x1_taken[static_cast<std::size_t>(i - 1)]) continue;
                place(i, j, true);
                recurse(j + 1);
                unplace(i, j, true);
            }
            return;
        }
        // D2D link: inactive, then D2D mode per channel, then cellular mode
        // per (uplink, downlink) channel pair.
        recurse(j + 1);
        for (ChannelId i = 1; i <= s.num_channels(); ++i) {
            if (!channel_open_for_d2d(i)) continue;
            place(i, j, false);
            recurse(j + 1);
            unplace(i, j, false);
        }
        if (opts.force_d2d_mode_only) return;
        for (ChannelId u = 1; u <= s.m_u; ++u) {
            if (x1_taken[static_cast<std::size_t>(u - 1)] ||
                !channel_open_for_d2d(u))
                continue;
            for (ChannelId d = s.m_u + 1; d <= s.num_channels(); ++d) {
                if (x1_taken[static_cast<std::size_t>(d - 1)] ||
                    !channel_open_for_d2d(d))
                    continue;
                current.set_mode(j, true);
                place(u, j, true);
                place(d, j, true);
                recurse(j + 1);
                unplace(d, j, true);
                unplace(u, j, true);
                current.set_mode(j, false);
            }
        }
    }
};

}  // namespace

double estimate_assignment_count(const Scenario& s, const EnumOptions& opts) {
    const int spare = std::min(s.m_u - s.n_uc, s.m_d - s.n_dc);
    const int x_max =
        opts.force_d2d_mode_only ? 0 : std::max(0, std::min(spare, s.n_d));
    double total = 0.0;
    for (int x = 0; x <= x_max; ++x) {
        total += binomial(s.n_d, x) * falling_factorial(s.m_u, s.n_uc + x) *
                 falling_factorial(s.m_d, s.n_dc + x) *
                 std::pow(static_cast<double>(s.num_channels() + 1),
                          static_cast<double>(s.n_d - x));
    }
    return total;
}

SolveResult exhaustive_solve(const Scenario& s, const EnumOptions& opts) {
    s.validate();
    const double estimate = estimate_assignment_count(s, opts);
    if (estimate > static_cast<double>(opts.budget))
        throw BudgetError("exhaustive_solve: estimated " +
                              std::to_string(estimate) +
                              " assignments exceeds budget " +
                              std::to_string(opts.budget),
                          estimate);

    const auto start = std::chrono::steady_clock::now();
    Enumerator e(s, opts);
    e.recurse(1);

    SolveResult result;
    result.stats.decisions_enumerated = e.leaves;
    result.stats.wall_time_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - start)
            .count();
    if (!e.have_best) {
        result.assignment = Assignment::empty_for(s);
        result.feasible = false;
        return result;
    }
    result.assignment = e.best_assignment;
    result.feasible = true;
    result.objective = e.best_value;
    result.per_link_rate.resize(static_cast<std::size_t>(s.num_links()));
    for (LinkId j = 1; j <= s.num_links(); ++j)
        result.per_link_rate[static_cast<std::size_t>(j - 1)] =
            link_rate(s, result.assignment, j);
    return result;
}

}  // namespace d2dalloc
