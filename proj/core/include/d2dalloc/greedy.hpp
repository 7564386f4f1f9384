#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "d2dalloc/matching.hpp"
#include "d2dalloc/model.hpp"

namespace d2dalloc {

struct GreedyOptions {
    // One-to-one sharing baseline: at most one D2D link (either mode) may
    // occupy a channel, on top of the usual single x=1 occupant.
    bool restrict_one_d2d_per_channel = false;
};

// Weighted interference-free rate gain of each cellular link on each
// channel; nullopt marks a direction mismatch or a floor miss.
struct EdgeWeightTable {
    int channels = 0;
    int cellular_links = 0;
    std::vector<EdgeWeight> t;

    EdgeWeight& at(ChannelId i, LinkId j) {
        return t[static_cast<std::size_t>(i - 1) * cellular_links + (j - 1)];
    }
    const EdgeWeight& at(ChannelId i, LinkId j) const {
        return t[static_cast<std::size_t>(i - 1) * cellular_links + (j - 1)];
    }
};

EdgeWeight cellular_edge_weight(const Scenario& s, ChannelId i, LinkId j);
EdgeWeightTable cellular_edge_weights(const Scenario& s);

struct KmOutcome {
    std::vector<std::pair<ChannelId, LinkId>> pairs;  // sorted by channel
    double total = 0.0;
};

// Channel assignment for the cellular links as a maximum-weight bipartite
// matching; every cellular link must land on a finite edge, otherwise the
// instance is unmatchable (nullopt).
std::optional<KmOutcome> km_match(const EdgeWeightTable& table);

// One admission candidate for an unassigned D2D link: a single channel in
// D2D mode (exactly one of up/down set) or an uplink/downlink channel pair
// in cellular mode.
struct Candidate {
    ChannelId up = 0;    // 0 = none
    ChannelId down = 0;  // 0 = none
    LinkId link = 0;
    bool cellular_mode = false;
};

// Weighted sum rate of the given occupants of channel i. A cellular-mode
// D2D occupant counts at min(this hop, its other hop), the other hop read
// from the current assignment; such occupants must therefore already hold
// their channel pair in `partial`. lc/ld may otherwise be hypothetical.
double channel_value(const Scenario& s, const Assignment& partial,
                     ChannelId i, LinkMask lc, LinkMask ld);

// Net objective gain of admitting the candidate on top of `partial`:
// the channel-value delta for D2D mode, the two-channel delta with the link
// counted once at its min rate for cellular mode (scaled by the spare-pair
// priority factor). nullopt when any occupant, old or new, would miss its
// floor, when cellular mode is requested on a channel with an x=1 occupant,
// or when no spare channel pair exists for cellular mode at all.
std::optional<double> priority_value(const Scenario& s,
                                     const Assignment& partial,
                                     const Candidate& cand,
                                     int unassigned_d2d,
                                     const GreedyOptions& opts = {});

// Bipartite-matching seeded greedy: cellular links placed by km_match, then
// repeated admission of the highest positive-priority D2D candidate until
// none remains. The returned assignment always passes check_feasible;
// an unmatchable cellular stage yields feasible=false.
SolveResult greedy_solve(const Scenario& s, const GreedyOptions& opts = {});

}  // namespace d2dalloc
