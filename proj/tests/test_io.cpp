#include "d2dalloc/io.hpp"

#include <cstdlib>
#include <filesystem>

#include <gtest/gtest.h>

#include "d2dalloc/dp.hpp"
#include "test_util.hpp"

namespace {

using namespace d2dalloc;
namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("d2dalloc_io_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }
    std::string path(const std::string& name) const {
        return (dir_ / name).string();
    }
    fs::path dir_;
};

TEST_F(IoTest, ScenarioRoundTripIsByteStable) {
    const Scenario s = testutil::gen_instance(17, 1, 1, 2, 2, 2);
    const std::string text = io::scenario_to_json(s);
    const Scenario back = io::scenario_from_json(text);
    EXPECT_EQ(io::scenario_to_json(back), text);
    io::save_scenario(s, path("s.json"));
    const Scenario loaded = io::load_scenario(path("s.json"));
    EXPECT_EQ(io::scenario_to_json(loaded), text);
    EXPECT_FALSE(fs::exists(path("s.json.tmp")));
}

TEST_F(IoTest, ScenarioAcceptsDbFloors) {
    Scenario s = testutil::blank_scenario(1, 0, 0, 1, 0);
    testutil::set_gain(s, 1, 1, kBaseStation, 2.0);
    std::string text = io::scenario_to_json(s);
    // swap the linear floor for a dB one
    const std::string needle = "\"sinr_min\"";
    const std::size_t at = text.find(needle);
    ASSERT_NE(at, std::string::npos);
    const std::size_t colon = text.find(':', at);
    const std::size_t comma = text.find_first_of(",}", colon);
    text = text.substr(0, at) + "\"sinr_min_db\": 3.0" + text.substr(comma);
    const Scenario back = io::scenario_from_json(text);
    EXPECT_NEAR(back.link(1).sinr_min, db_to_linear(3.0), 1e-12);
}

TEST_F(IoTest, ScenarioRejectsGarbage) {
    EXPECT_THROW(io::scenario_from_json("not json"), io::IoError);
    EXPECT_THROW(io::scenario_from_json("{}"), io::IoError);
    EXPECT_THROW(io::scenario_from_json("{\"counts\": {\"n_uc\": 1}}"),
                 io::IoError);
    const Scenario s = testutil::gen_instance(3, 1, 0, 1, 1, 1);
    std::string text = io::scenario_to_json(s);
    const std::size_t at = text.find("\"noise_w\"");
    ASSERT_NE(at, std::string::npos);
    EXPECT_THROW(
        io::scenario_from_json(text.substr(0, at) + "\"typo_w\"" +
                               text.substr(at + 9)),
        io::IoError);
}

TEST_F(IoTest, GenConfigRoundTripAndDefaults) {
    GenConfig cfg;
    cfg.n_d = 5;
    cfg.master_seed = 31337;
    cfg.sinr_min_d2d_db = 3.0;
    const GenConfig back = io::gen_config_from_json(io::gen_config_to_json(cfg));
    EXPECT_EQ(back.n_d, 5);
    EXPECT_EQ(back.master_seed, 31337u);
    EXPECT_EQ(back.sinr_min_d2d_db, 3.0);
    // empty object = all defaults
    const GenConfig defaults = io::gen_config_from_json("{}");
    EXPECT_EQ(defaults.n_uc, 1);
    EXPECT_EQ(defaults.cell_radius_m, 500.0);
    EXPECT_THROW(io::gen_config_from_json("{\"cellradius\": 1}"),
                 io::IoError);
}

TEST_F(IoTest, ResultRoundTrip) {
    const Scenario s = testutil::gen_instance(23, 1, 1, 2, 2, 2);
    const SolveResult r = dp_solve(s);
    ASSERT_TRUE(r.feasible);
    const std::string text = io::result_to_json(s, r);
    const SolveResult back = io::result_from_json(s, text);
    EXPECT_EQ(back.feasible, r.feasible);
    EXPECT_EQ(back.assignment, r.assignment);
    EXPECT_EQ(back.objective, r.objective);
    EXPECT_EQ(back.stats.states_visited, r.stats.states_visited);
}

TEST_F(IoTest, InfeasibleResultHasNullObjective) {
    Scenario s = testutil::blank_scenario(1, 0, 0, 1, 0);
    testutil::set_gain(s, 1, 1, kBaseStation, 0.5);
    s.links[0].sinr_min = 10.0;
    const SolveResult r = dp_solve(s);
    ASSERT_FALSE(r.feasible);
    const std::string text = io::result_to_json(s, r);
    EXPECT_NE(text.find("\"objective\": null"), std::string::npos);
    const SolveResult back = io::result_from_json(s, text);
    EXPECT_FALSE(back.feasible);
}

TEST_F(IoTest, ResolveInputPathUsesConfigDirFallback) {
    const std::string inside = path("cfg.json");
    io::write_file_atomic(inside, "{}\n");
    EXPECT_EQ(io::resolve_input_path(inside), inside);
    ::setenv("D2DALLOC_CONFIG_DIR", dir_.c_str(), 1);
    EXPECT_EQ(io::resolve_input_path("cfg.json"), (dir_ / "cfg.json").string());
    EXPECT_THROW(io::resolve_input_path("missing.json"), io::IoError);
    ::unsetenv("D2DALLOC_CONFIG_DIR");
    EXPECT_THROW(io::resolve_input_path("cfg.json"), io::IoError);
}

TEST_F(IoTest, AtomicWriteReplacesExistingFile) {
    const std::string p = path("out.txt");
    io::write_file_atomic(p, "first");
    io::write_file_atomic(p, "second");
    EXPECT_EQ(io::read_file(p), "second");
    EXPECT_FALSE(fs::exists(p + ".tmp"));
}

}  // namespace
