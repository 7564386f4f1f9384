#include "d2dalloc/harness.hpp"

#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "d2dalloc/io.hpp"
#include "test_util.hpp"

namespace {

using namespace d2dalloc;

TEST(AlgoSpec, TagParseRoundTrip) {
    for (const char* tag :
         {"dp", "greedy", "exhaustive", "dp+force-d2d-mode",
          "greedy+restrict-sharing", "exhaustive+force-d2d-mode",
          "exhaustive+restrict-sharing", "dp+per-hop-qos",
          "dp+force-d2d-mode+per-hop-qos"}) {
        EXPECT_EQ(AlgoSpec::parse(tag).tag(), tag);
    }
    EXPECT_THROW(AlgoSpec::parse("simplex"), std::invalid_argument);
    EXPECT_THROW(AlgoSpec::parse("dp+warp"), std::invalid_argument);
    EXPECT_THROW(AlgoSpec::parse("greedy+force-d2d-mode"),
                 std::invalid_argument);
    EXPECT_THROW(AlgoSpec::parse("dp+restrict-sharing"),
                 std::invalid_argument);
}

TEST(RunCompare, DpAndExhaustiveAgree) {
    int feasible = 0;
    for (std::uint64_t seed : {5u, 8u, 13u, 21u}) {
        const Scenario s = testutil::gen_instance(seed, 1, 1, 2, 2, 2);
        const std::vector<ResultRow> rows = run_compare(
            s, {AlgoSpec::parse("dp"), AlgoSpec::parse("exhaustive"),
                AlgoSpec::parse("greedy")});
        ASSERT_EQ(rows.size(), 3u);
        ASSERT_EQ(rows[0].feasible, rows[1].feasible);
        for (const ResultRow& r : rows) {
            EXPECT_TRUE(r.solved);
            if (r.feasible)
                EXPECT_EQ(r.n_cell_mode + r.n_d2d_mode + r.n_inactive, s.n_d);
        }
        if (!rows[0].feasible) continue;
        ++feasible;
        EXPECT_NEAR(rows[0].objective, rows[1].objective, 1e-9);
        EXPECT_LE(rows[2].objective, rows[0].objective + 1e-9);
    }
    EXPECT_GE(feasible, 2);
}

TEST(RunCompare, BudgetFailureIsRowLevel) {
    const Scenario s = testutil::gen_instance(6, 1, 1, 3, 2, 2);
    RunOptions run;
    run.enum_budget = 1;
    const std::vector<ResultRow> rows =
        run_compare(s, {AlgoSpec::parse("exhaustive"), AlgoSpec::parse("dp")},
                    run);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_FALSE(rows[0].solved);
    EXPECT_FALSE(rows[0].feasible);
    EXPECT_FALSE(rows[0].error.empty());
    EXPECT_TRUE(rows[1].solved);
}

SweepSpec small_spec() {
    SweepSpec spec;
    spec.base.n_uc = 1;
    spec.base.n_dc = 1;
    spec.base.n_d = 2;
    spec.base.m_u = 2;
    spec.base.m_d = 2;
    spec.base.master_seed = 11;
    spec.swept_param = "d2d_pair_distance_max_m";
    spec.values = {40.0, 80.0, 120.0};
    spec.seeds_per_point = 5;
    spec.algos = {AlgoSpec::parse("dp"), AlgoSpec::parse("greedy")};
    return spec;
}

std::string strip_wall_time(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t cut = line.rfind(',');
        out << line.substr(0, cut) << "\n";
    }
    return out.str();
}

TEST(RunSweep, RowCountAndDeterminism) {
    const SweepSpec spec = small_spec();
    const SweepOutput a = run_sweep(spec);
    EXPECT_EQ(a.rows.size(), 3u * 5u * 2u);
    const SweepOutput b = run_sweep(spec);
    EXPECT_EQ(strip_wall_time(a.raw_csv), strip_wall_time(b.raw_csv));

    SweepSpec parallel = spec;
    parallel.workers = 4;
    const SweepOutput c = run_sweep(parallel);
    EXPECT_EQ(strip_wall_time(a.raw_csv), strip_wall_time(c.raw_csv));
}

TEST(RunSweep, CsvShapeAndSummary) {
    const SweepOutput out = run_sweep(small_spec());
    std::istringstream in(out.raw_csv);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, kRowCsvHeader);
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++lines;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 10);
    }
    EXPECT_EQ(lines, 30);

    std::istringstream sin(out.summary_csv);
    std::getline(sin, header);
    int summary_lines = 0;
    while (std::getline(sin, line)) ++summary_lines;
    EXPECT_EQ(summary_lines, 3 * 2);  // one per (point, algo)
}

TEST(RunSweep, SpecJsonParsingAndValidation) {
    const char* text = R"({
      "base": {"counts": {"n_uc": 1, "n_dc": 1, "n_d": 2, "m_u": 2, "m_d": 2},
               "master_seed": 9},
      "swept_param": "n_d",
      "values": [2, 4],
      "seeds_per_point": 3,
      "algos": ["greedy", "greedy+restrict-sharing"],
      "workers": 2
    })";
    const SweepSpec spec = sweep_spec_from_json(text);
    EXPECT_EQ(spec.values.size(), 2u);
    EXPECT_EQ(spec.algos[1].tag(), "greedy+restrict-sharing");
    EXPECT_EQ(spec.workers, 2);
    const SweepOutput out = run_sweep(spec);
    EXPECT_EQ(out.rows.size(), 2u * 3u * 2u);

    EXPECT_THROW(sweep_spec_from_json("{\"swept_param\": \"bogus\"}"),
                 io::IoError);
    EXPECT_THROW(sweep_spec_from_json("{\"valves\": [1]}"), io::IoError);
}

TEST(RunSweep, PerSeedDominanceHoldsOnEveryRow) {
    SweepSpec spec = small_spec();
    spec.algos = {AlgoSpec::parse("dp"), AlgoSpec::parse("dp+force-d2d-mode"),
                  AlgoSpec::parse("greedy")};
    const SweepOutput out = run_sweep(spec);
    for (std::size_t i = 0; i < out.rows.size(); i += 3) {
        const ResultRow& joint = out.rows[i];
        const ResultRow& forced = out.rows[i + 1];
        const ResultRow& greedy = out.rows[i + 2];
        ASSERT_TRUE(joint.feasible);
        if (forced.feasible)
            EXPECT_GE(joint.objective, forced.objective - 1e-9);
        EXPECT_LE(greedy.objective, joint.objective + 1e-9);
    }
}

}  // namespace
