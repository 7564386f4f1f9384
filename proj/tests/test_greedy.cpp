#include "d2dalloc/greedy.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "d2dalloc/dp.hpp"
#include "test_util.hpp"

namespace {

using namespace d2dalloc;
using testutil::blank_scenario;
using testutil::gen_instance;
using testutil::set_gain;

TEST(CellularEdgeWeight, DirectionFloorAndValue) {
    Scenario s = blank_scenario(1, 1, 0, 1, 1, 1.0);
    s.links[0].sinr_min = 1.0;
    set_gain(s, 1, 1, kBaseStation, 3.0);
    // ULC on a downlink channel: mismatch
    EXPECT_FALSE(cellular_edge_weight(s, 2, 1).has_value());
    // matching direction, SNR 3, w=1
    const EdgeWeight w = cellular_edge_weight(s, 1, 1);
    ASSERT_TRUE(w.has_value());
    EXPECT_NEAR(*w, 2.0, 1e-12);
    // interference-free SNR below the floor
    Scenario weak = s;
    set_gain(weak, 1, 1, kBaseStation, 0.5);
    EXPECT_FALSE(cellular_edge_weight(weak, 1, 1).has_value());
}

TEST(KmMatch, MatchesAllCellularLinks) {
    Scenario s = blank_scenario(1, 1, 0, 2, 2, 1.0);
    set_gain(s, 1, 1, kBaseStation, 3.0);
    set_gain(s, 2, 1, kBaseStation, 1.0);
    set_gain(s, 3, kBaseStation, 2, 1.0);
    set_gain(s, 4, kBaseStation, 2, 3.0);
    const auto out = km_match(cellular_edge_weights(s));
    ASSERT_TRUE(out.has_value());
    EXPECT_NEAR(out->total, 4.0, 1e-12);  // log2(4) on each side
    ASSERT_EQ(out->pairs.size(), 2u);
    EXPECT_EQ(out->pairs[0], (std::pair<ChannelId, LinkId>{1, 1}));
    EXPECT_EQ(out->pairs[1], (std::pair<ChannelId, LinkId>{4, 2}));
}

TEST(KmMatch, UnmatchableWhenAllEdgesForbidden) {
    Scenario s = blank_scenario(1, 0, 0, 1, 0, 1.0);
    s.links[0].sinr_min = 100.0;
    set_gain(s, 1, 1, kBaseStation, 3.0);
    EXPECT_FALSE(km_match(cellular_edge_weights(s)).has_value());
}

TEST(ChannelValue, EmptyChannelIsZero) {
    const Scenario s = blank_scenario(1, 0, 1, 1, 1);
    const Assignment a = Assignment::empty_for(s);
    EXPECT_EQ(channel_value(s, a, 1, 0, 0), 0.0);
}

TEST(ChannelValue, SingleCellularOccupant) {
    Scenario s = blank_scenario(1, 0, 0, 1, 0, 1.0);
    s.links[0].weight = 2.0;
    set_gain(s, 1, 1, kBaseStation, 1.0);  // SINR 1
    Assignment a = Assignment::empty_for(s);
    a.set(1, 1);
    EXPECT_NEAR(channel_value(s, a, 1, link_bit(1), 0), 2.0, 1e-12);
}

TEST(ChannelValue, CellularPlusD2dHandComputed) {
    Scenario s = blank_scenario(1, 0, 1, 1, 0, 0.1);
    set_gain(s, 1, 1, kBaseStation, 1.0);
    set_gain(s, 1, 2, 3, 1.0);
    set_gain(s, 1, 1, 3, 0.1);
    set_gain(s, 1, 2, kBaseStation, 0.1);
    Assignment a = Assignment::empty_for(s);
    a.set(1, 1);
    a.set(1, 2);
    // both SINRs are 1/(0.1 + 0.1) = 5
    EXPECT_NEAR(channel_value(s, a, 1, link_bit(1), link_bit(2)),
                2.0 * std::log2(6.0), 1e-12);
}

Scenario relay_scenario() {
    // one D2D link, empty uplink+downlink channel, hop SINRs 3 and 1
    Scenario s = blank_scenario(0, 0, 1, 1, 1, 1.0);
    set_gain(s, 1, 1, kBaseStation, 3.0);
    set_gain(s, 2, kBaseStation, 2, 1.0);
    return s;
}

TEST(PriorityValue, D2dModeOnEmptyChannel) {
    Scenario s = blank_scenario(0, 0, 1, 1, 0, 1.0);
    set_gain(s, 1, 1, 2, 3.0);
    const Assignment a = Assignment::empty_for(s);
    const auto v = priority_value(s, a, {1, 0, 1, false}, 1);
    ASSERT_TRUE(v.has_value());
    EXPECT_NEAR(*v, 2.0, 1e-12);
}

TEST(PriorityValue, FloorFailureIsInfeasible) {
    Scenario s = blank_scenario(0, 0, 2, 1, 0, 1.0);
    s.links[0].sinr_min = 1.0;
    s.links[1].sinr_min = 1.0;
    set_gain(s, 1, 1, 2, 3.0);
    set_gain(s, 1, 3, 4, 3.0);
    set_gain(s, 1, 3, 2, 10.0);  // the newcomer wrecks the incumbent
    Assignment a = Assignment::empty_for(s);
    a.set(1, 1);
    EXPECT_FALSE(priority_value(s, a, {1, 0, 2, false}, 1).has_value());
}

TEST(PriorityValue, CellularModeNetGain) {
    const Scenario s = relay_scenario();
    const Assignment a = Assignment::empty_for(s);
    // spare pairs = min(1-0, 1-0) = 1, one unassigned link: factor 1
    const auto v = priority_value(s, a, {1, 2, 1, true}, 1);
    ASSERT_TRUE(v.has_value());
    EXPECT_NEAR(*v, 1.0, 1e-12);  // w * log2(1 + min(3, 1))
}

TEST(PriorityValue, SparePairFactorScalesCellularMode) {
    Scenario s = blank_scenario(0, 0, 3, 2, 2, 1.0);
    testutil::set_gain_all_channels(s, 1, kBaseStation, 3.0);
    testutil::set_gain_all_channels(s, kBaseStation, 2, 1.0);
    const Assignment a = Assignment::empty_for(s);
    // spare = 2: the factor kicks in once fewer links than pairs remain
    const auto full = priority_value(s, a, {1, 3, 1, true}, 2);
    const auto more = priority_value(s, a, {1, 3, 1, true}, 5);
    const auto scaled = priority_value(s, a, {1, 3, 1, true}, 1);
    ASSERT_TRUE(full && more && scaled);
    EXPECT_NEAR(*full, *more, 1e-12);
    EXPECT_NEAR(*scaled, 0.5 * *full, 1e-12);
}

TEST(PriorityValue, CellularModeNeedsFreeChannelsAndSparePairs) {
    Scenario roomy = blank_scenario(1, 1, 1, 2, 2, 1.0);
    set_gain(roomy, 1, 1, kBaseStation, 3.0);
    testutil::set_gain_all_channels(roomy, 3, kBaseStation, 5.0);
    testutil::set_gain_all_channels(roomy, kBaseStation, 4, 5.0);
    Assignment a = Assignment::empty_for(roomy);
    a.set(1, 1);
    // channel 1 already carries an x=1 occupant
    EXPECT_FALSE(priority_value(roomy, a, {1, 4, 3, true}, 1).has_value());
    // the free pair (2, 4) still works
    EXPECT_TRUE(priority_value(roomy, a, {2, 4, 3, true}, 1).has_value());

    // spare pairs = min(0, 0): cellular mode structurally impossible
    Scenario tight = blank_scenario(1, 1, 1, 1, 1, 1.0);
    testutil::set_gain_all_channels(tight, 3, kBaseStation, 5.0);
    testutil::set_gain_all_channels(tight, kBaseStation, 4, 5.0);
    const Assignment b = Assignment::empty_for(tight);
    EXPECT_FALSE(priority_value(tight, b, {1, 2, 3, true}, 1).has_value());
}

TEST(GreedySolve, NoD2dLinksEqualsTheMatching) {
    Scenario s = blank_scenario(1, 1, 0, 2, 2, 1.0);
    set_gain(s, 1, 1, kBaseStation, 3.0);
    set_gain(s, 2, 1, kBaseStation, 1.0);
    set_gain(s, 3, kBaseStation, 2, 7.0);
    set_gain(s, 4, kBaseStation, 2, 1.0);
    const auto km = km_match(cellular_edge_weights(s));
    ASSERT_TRUE(km.has_value());
    const SolveResult r = greedy_solve(s);
    ASSERT_TRUE(r.feasible);
    EXPECT_NEAR(r.objective, km->total, 1e-12);
}

TEST(GreedySolve, UnmatchableInstanceReportsInfeasible) {
    Scenario s = blank_scenario(1, 0, 1, 1, 0, 1.0);
    s.links[0].sinr_min = 100.0;
    set_gain(s, 1, 1, kBaseStation, 3.0);
    set_gain(s, 1, 2, 3, 3.0);
    const SolveResult r = greedy_solve(s);
    EXPECT_FALSE(r.feasible);
}

TEST(GreedySolve, InterferenceFreeInstanceReachesTheOptimum) {
    Scenario s = blank_scenario(1, 1, 2, 2, 2, 1.0);
    set_gain(s, 1, 1, kBaseStation, 3.0);
    set_gain(s, 3, kBaseStation, 2, 3.0);
    // distinct direct gains per channel, zero cross gains everywhere
    double g = 2.0;
    for (LinkId j = 3; j <= 4; ++j) {
        const Link& l = s.link(j);
        for (ChannelId i = 1; i <= s.num_channels(); ++i)
            set_gain(s, i, l.tx_device, l.rx_device, g + 0.5 * i + j);
    }
    const SolveResult greedy = greedy_solve(s);
    const SolveResult dp = dp_solve(s);
    ASSERT_TRUE(greedy.feasible);
    EXPECT_NEAR(greedy.objective, dp.objective, 1e-9);
}

TEST(GreedySolve, SoundnessOnRandomEnsemble) {
    int feasible = 0;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        const int n_d = 1 + static_cast<int>(seed % 4);
        const Scenario s = gen_instance(seed * 211 + 7, 1, 1, n_d, 2, 2);
        const SolveResult greedy = greedy_solve(s);
        const SolveResult dp = dp_solve(s);
        // km saturation decides instance feasibility for every solver
        ASSERT_EQ(greedy.feasible, dp.feasible);
        if (!greedy.feasible) continue;
        ++feasible;
        EXPECT_TRUE(check_feasible(s, greedy.assignment).ok());
        const auto km = km_match(cellular_edge_weights(s));
        ASSERT_TRUE(km.has_value());
        EXPECT_GE(greedy.objective, km->total - 1e-9);
        EXPECT_LE(greedy.objective, dp.objective + 1e-9);
    }
    EXPECT_GE(feasible, 45);
}

TEST(GreedySolve, RestrictedSharingCapsD2dOccupancy) {
    int feasible = 0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const Scenario s = gen_instance(seed * 53 + 29, 1, 1, 5, 2, 2);
        GreedyOptions restricted;
        restricted.restrict_one_d2d_per_channel = true;
        const SolveResult r = greedy_solve(s, restricted);
        if (!r.feasible) continue;
        ++feasible;
        for (ChannelId i = 1; i <= s.num_channels(); ++i) {
            const CoChannelSets cs = co_channel_sets(r.assignment, i);
            EXPECT_LE(std::popcount((cs.lc | cs.ld) & s.d2d_links_mask()), 1);
        }
        const SolveResult full = greedy_solve(s);
        EXPECT_GE(full.objective, r.objective - 1e-9);
    }
    EXPECT_GE(feasible, 22);
}

// Recompute-everything reference for the incremental candidate cache: every
// iteration re-evaluates every candidate through priority_value. The cached
// engine must pick the identical admission sequence.
Assignment reference_greedy(const Scenario& s, const GreedyOptions& opts) {
    Assignment a = Assignment::empty_for(s);
    const auto km = km_match(cellular_edge_weights(s));
    if (!km) return a;
    for (const auto& [i, j] : km->pairs) a.set(i, j);
    LinkMask unassigned = s.d2d_links_mask();
    while (unassigned != 0) {
        bool found = false;
        double best_value = 0.0;
        Candidate best;
        auto consider = [&](const Candidate& c) {
            const auto v = priority_value(s, a, c, std::popcount(unassigned),
                                          opts);
            if (!v || *v <= 0.0) return;
            const auto key =
                std::make_tuple(c.cellular_mode, c.link, c.up, c.down);
            const auto best_key = std::make_tuple(best.cellular_mode,
                                                  best.link, best.up, best.down);
            if (!found || *v > best_value ||
                (*v == best_value && key < best_key)) {
                found = true;
                best_value = *v;
                best = c;
            }
        };
        for (LinkMask mm = unassigned; mm != 0;) {
            const LinkId j = pop_lowest(mm);
            for (ChannelId i = 1; i <= s.num_channels(); ++i) {
                Candidate c;
                c.link = j;
                (s.is_uplink_channel(i) ? c.up : c.down) = i;
                consider(c);
            }
            for (ChannelId u = 1; u <= s.m_u; ++u)
                for (ChannelId d = s.m_u + 1; d <= s.num_channels(); ++d)
                    consider({u, d, j, true});
        }
        if (!found) break;
        if (best.cellular_mode) {
            a.set(best.up, best.link);
            a.set(best.down, best.link);
            a.set_mode(best.link, true);
        } else {
            a.set(std::max(best.up, best.down), best.link);
        }
        unassigned &= ~link_bit(best.link);
    }
    return a;
}

TEST(GreedySolve, IncrementalCacheMatchesFullRecomputation) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        GenConfig cfg;
        cfg.n_uc = 1;
        cfg.n_dc = 1;
        cfg.n_d = 4 + static_cast<int>(seed % 5);
        cfg.m_u = 2;
        cfg.m_d = 2;
        cfg.d2d_pair_distance_max_m = 150.0;
        cfg.sinr_min_cellular_db = 3.0;
        cfg.sinr_min_d2d_db = 3.0;
        cfg.master_seed = seed * 1009 + 3;
        const Scenario s = generate(cfg);
        for (const bool restricted : {false, true}) {
            GreedyOptions opts;
            opts.restrict_one_d2d_per_channel = restricted;
            const SolveResult r = greedy_solve(s, opts);
            const Assignment ref = reference_greedy(s, opts);
            if (!r.feasible) continue;
            EXPECT_EQ(r.assignment, ref) << "seed " << seed;
        }
    }
}

TEST(GreedySolve, AdmissionsAreBoundedByD2dCount) {
    const Scenario s = gen_instance(999, 1, 1, 6, 2, 2);
    const SolveResult r = greedy_solve(s);
    ASSERT_TRUE(r.feasible);
    int active = 0;
    for (LinkId j = s.num_cellular() + 1; j <= s.num_links(); ++j)
        if (r.assignment.active(j)) ++active;
    EXPECT_LE(active, s.n_d);
}

}  // namespace
