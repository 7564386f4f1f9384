#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "d2dalloc/model.hpp"

namespace d2dalloc {

// A share value that is either a finite weighted rate or infeasible. nullopt
// never enters arithmetic and compares below every finite value, which is
// exactly the ordering the recursion needs.
using Utility = std::optional<double>;

// Options for the exact dynamic program.
struct DpOptions {
    bool force_d2d_mode_only = false;
    // Check each hop of a cellular-mode D2D link against its floor
    // separately instead of checking min(uplink, downlink) once. The two
    // readings accept the same decisions (min >= t iff both hops >= t);
    // the flag exists so the stricter-looking literal form stays available.
    bool per_hop_qos = false;
    std::uint64_t state_budget = std::uint64_t{1} << 26;
};

// DP state: `stage` uplink channels 1..stage remain to be arranged for the
// links still in `links`, together with the unassigned downlink channels in
// `down_channels` (bit 0 = channel m_u+1).
struct DpState {
    int stage = 0;
    LinkMask links = 0;
    ChannelMask down_channels = 0;
};

// One stage decision: the x=1 occupant of the stage's uplink channel (at
// most one link: an uplink cellular link or a D2D link switched to cellular
// mode), the D2D-mode links sharing that channel, and, when the occupant is
// a D2D link, the downlink channel it pairs with plus that channel's
// D2D-mode occupants. Stage-0 entries reuse the same record: cs holds the
// downlink cellular occupant of down_channel and dsu stays empty.
struct DpDecision {
    LinkMask cs = 0;
    LinkMask dsu = 0;
    ChannelId down_channel = 0;  // 0 = none
    LinkMask dsd = 0;

    bool operator==(const DpDecision&) const = default;
};

// Deterministic tie order: lexicographic on (cs, dsu, down_channel, dsd)
// where masks compare as their ascending element lists.
bool decision_less(const DpDecision& a, const DpDecision& b);

// Weighted sum rate of the links named by one stage decision on uplink
// channel k, or infeasible when any occupant of k or of the paired downlink
// channel misses its SINR floor. A cellular-mode D2D link is counted once at
// min(uplink hop, downlink hop).
Utility share_utility(const Scenario& s, ChannelId k, const DpDecision& dec,
                      bool per_hop_qos = false);

// Every decision permitted at stage k in the given state: members drawn from
// the state's link set, at most one x=1 occupant, the cellular-priority
// guards applied, and decisions whose share_utility is infeasible dropped.
std::vector<DpDecision> enumerate_decisions(const Scenario& s, ChannelId k,
                                            const DpState& state,
                                            const DpOptions& opts = {});

// Channel-assignment-only sub-problem: the best value for `links` sharing
// only the downlink channels in `down_channels`, every D2D link kept in D2D
// mode. Infeasible when any uplink cellular link remains or a downlink
// cellular link cannot be served. The assignment fragment holds just these
// placements.
std::pair<Utility, Assignment> stage0_solve(const Scenario& s, LinkMask links,
                                            ChannelMask down_channels);

// Exact solver: memoized recursion over (stage, link set, downlink channel
// set), reconstruction of rho and x from the stored best decisions, full
// feasibility re-check of the result. Throws BudgetError when the memo
// outgrows opts.state_budget.
SolveResult dp_solve(const Scenario& s, const DpOptions& opts = {});

// Loose state-count bound (m_u + 1) * 2^N * 2^m_d, saturated at 2^63.
std::uint64_t dp_state_bound(const Scenario& s);

// True iff the recorded states_visited stays within dp_state_bound.
bool dp_state_count_check(const Scenario& s, const SolveStats& stats);

}  // namespace d2dalloc
