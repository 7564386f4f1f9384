#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "d2dalloc/model.hpp"
#include "d2dalloc/scenario_gen.hpp"

namespace d2dalloc {

// One solver selection, written as a tag like "dp", "greedy+restrict-sharing"
// or "dp+force-d2d-mode" in specs and CSV rows.
struct AlgoSpec {
    std::string name = "dp";  // dp | greedy | exhaustive
    bool force_d2d_mode = false;
    bool restrict_sharing = false;
    bool per_hop_qos = false;

    std::string tag() const;
    static AlgoSpec parse(const std::string& tag);
};

struct RunOptions {
    std::uint64_t enum_budget = 20'000'000;
    std::uint64_t dp_state_budget = std::uint64_t{1} << 26;
};

struct ResultRow {
    std::string swept_param = "none";
    double swept_value = 0.0;
    std::uint64_t seed = 0;
    std::string algo;
    bool solved = false;    // solver ran to completion (no budget error)
    bool feasible = false;  // a feasible assignment was found
    double objective = 0.0;
    int n_cell_mode = 0;
    int n_d2d_mode = 0;
    int n_inactive = 0;
    std::uint64_t states_visited = 0;
    double wall_time_ms = 0.0;
    std::string error;  // diagnostic only, not part of the CSV
};

// A solver produced something that contradicts an exact invariant (objective
// mismatch on re-scoring, infeasible output, broken dominance ordering).
class CrossCheckError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dispatches one solver run.
SolveResult run_algo(const Scenario& s, const AlgoSpec& algo,
                     const RunOptions& run = {});

// Runs every algorithm on the same scenario; every objective is re-verified
// against the model and the exact dominance orderings between the rows are
// asserted (throws CrossCheckError on any breach). Budget errors are
// recorded per row without aborting the others.
std::vector<ResultRow> run_compare(const Scenario& s,
                                   const std::vector<AlgoSpec>& algos,
                                   const RunOptions& run = {});

struct SweepSpec {
    GenConfig base;
    std::string swept_param = "n_d";  // n_d | d2d_pair_distance_max_m |
                                      // d2d_cluster_radius_m
    std::vector<double> values;
    int seeds_per_point = 1;
    std::vector<AlgoSpec> algos;
    int workers = 1;
    RunOptions run;

    void validate() const;  // throws std::invalid_argument
};

SweepSpec sweep_spec_from_json(const std::string& text);
SweepSpec load_sweep_spec(const std::string& path);

struct SweepOutput {
    std::vector<ResultRow> rows;   // deterministic (point, seed, algo) order
    std::string raw_csv;
    std::string summary_csv;
};

// Deterministic given the spec: the scenario of (point p, seed index k) is
// generated from a seed derived from (base master_seed, p, k) and the row
// order never depends on scheduling. Rows are evaluated by `workers`
// threads, each owning its instances end to end.
SweepOutput run_sweep(const SweepSpec& spec);

// Raw rows and the per-(point, algo) mean/std aggregation, written
// atomically.
void write_sweep_files(const SweepOutput& out, const std::string& raw_path,
                       const std::string& summary_path);

extern const char* const kRowCsvHeader;
std::string rows_to_csv(const std::vector<ResultRow>& rows);

}  // namespace d2dalloc
