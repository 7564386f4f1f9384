// d2dalloc command line front end.
//
// Subcommands:
//   gen      generate a random scenario file from a generator config
//   solve    run one solver on a scenario file and write a result file
//   compare  run several solvers on one scenario, cross-check, emit CSV rows
//   sweep    run a full parameter sweep from a sweep spec
//
// Exit codes: 0 success, 2 spec/config/I-O error (including solver budget
// guards), 3 cross-check invariant violation.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "d2dalloc/harness.hpp"
#include "d2dalloc/io.hpp"
#include "d2dalloc/scenario_gen.hpp"

namespace {

using namespace d2dalloc;

std::vector<AlgoSpec> parse_algo_list(const std::string& list) {
    std::vector<AlgoSpec> out;
    std::size_t from = 0;
    while (from <= list.size()) {
        const std::size_t comma = list.find(',', from);
        const std::string tag = list.substr(from, comma - from);
        if (!tag.empty()) out.push_back(AlgoSpec::parse(tag));
        if (comma == std::string::npos) break;
        from = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("empty algorithm list");
    return out;
}

std::string summary_path_for(const std::string& raw_path) {
    const std::size_t dot = raw_path.rfind('.');
    if (dot == std::string::npos || raw_path.find('/', dot) != std::string::npos)
        return raw_path + ".summary";
    return raw_path.substr(0, dot) + ".summary" + raw_path.substr(dot);
}

int run(int argc, char** argv) {
    CLI::App app{"Joint mode selection and channel assignment for cellular "
                 "networks with underlaying D2D links"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a random scenario");
    std::string gen_config_path;
    std::string gen_out;
    std::uint64_t gen_seed = 0;
    bool gen_seed_set = false;
    gen->add_option("--config", gen_config_path,
                    "Generator config JSON (defaults used when omitted)");
    gen->add_option("--seed", gen_seed, "Master seed override")
        ->each([&](const std::string&) { gen_seed_set = true; });
    gen->add_option("--out", gen_out, "Output scenario path")->required();

    // solve
    auto* solve = app.add_subcommand("solve", "Run one solver on a scenario");
    std::string solve_algo = "dp";
    std::string solve_scenario;
    std::string solve_out;
    bool opt_force = false, opt_restrict = false, opt_per_hop = false;
    RunOptions solve_run;
    solve->add_option("--algo", solve_algo, "dp | greedy | exhaustive")
        ->required();
    solve->add_option("--scenario", solve_scenario, "Scenario JSON path")
        ->required();
    solve->add_option("--out", solve_out, "Result JSON path")->required();
    solve->add_flag("--force-d2d-mode", opt_force,
                    "Disable cellular mode (channel assignment only)");
    solve->add_flag("--restrict-sharing", opt_restrict,
                    "At most one D2D link per channel (baseline)");
    solve->add_flag("--per-hop-qos", opt_per_hop,
                    "Check each cellular-mode hop against the floor");
    solve->add_option("--budget", solve_run.enum_budget,
                      "Exhaustive enumeration budget");
    solve->add_option("--state-budget", solve_run.dp_state_budget,
                      "DP memo entry budget");

    // compare
    auto* compare =
        app.add_subcommand("compare", "Run several solvers on one scenario");
    std::string cmp_scenario;
    std::string cmp_algos = "dp,greedy";
    std::string cmp_out;
    RunOptions cmp_run;
    compare->add_option("--scenario", cmp_scenario, "Scenario JSON path")
        ->required();
    compare->add_option("--algos", cmp_algos,
                        "Comma separated algorithm tags, e.g. "
                        "dp,dp+force-d2d-mode,greedy+restrict-sharing");
    compare->add_option("--out", cmp_out, "Row CSV path (stdout when omitted)");
    compare->add_option("--budget", cmp_run.enum_budget,
                        "Exhaustive enumeration budget");
    compare->add_option("--state-budget", cmp_run.dp_state_budget,
                        "DP memo entry budget");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
    std::string sweep_spec_path;
    std::string sweep_out;
    std::string sweep_summary;
    int sweep_workers = 0;
    std::uint64_t sweep_seed = 0;
    bool sweep_seed_set = false;
    sweep->add_option("--spec", sweep_spec_path, "Sweep spec JSON")->required();
    sweep->add_option("--out", sweep_out, "Raw row CSV path")->required();
    sweep->add_option("--summary", sweep_summary,
                      "Summary CSV path (derived from --out when omitted)");
    sweep->add_option("--workers", sweep_workers, "Worker thread override");
    sweep->add_option("--seed", sweep_seed, "Master seed override")
        ->each([&](const std::string&) { sweep_seed_set = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help text or the parse error
        return code == 0 ? 0 : 2;
    }

    if (gen->parsed()) {
        GenConfig cfg;
        if (!gen_config_path.empty()) cfg = io::load_gen_config(gen_config_path);
        if (gen_seed_set) cfg.master_seed = gen_seed;
        io::save_scenario(generate(cfg), gen_out);
        std::cout << "wrote " << gen_out << "\n";
        return 0;
    }

    if (solve->parsed()) {
        AlgoSpec algo = AlgoSpec::parse(solve_algo);
        algo.force_d2d_mode = algo.force_d2d_mode || opt_force;
        algo.restrict_sharing = algo.restrict_sharing || opt_restrict;
        algo.per_hop_qos = algo.per_hop_qos || opt_per_hop;
        const Scenario s = io::load_scenario(solve_scenario);
        const SolveResult r = run_algo(s, algo, solve_run);
        io::save_result(s, r, solve_out);
        if (r.feasible)
            std::cout << algo.tag() << ": objective "
                      << r.objective << ", " << r.stats.wall_time_ms
                      << " ms\n";
        else
            std::cout << algo.tag() << ": no feasible assignment\n";
        return 0;
    }

    if (compare->parsed()) {
        const Scenario s = io::load_scenario(cmp_scenario);
        std::vector<ResultRow> rows =
            run_compare(s, parse_algo_list(cmp_algos), cmp_run);
        const std::string csv = rows_to_csv(rows);
        if (cmp_out.empty())
            std::cout << csv;
        else
            io::write_file_atomic(cmp_out, csv);
        return 0;
    }

    if (sweep->parsed()) {
        SweepSpec spec = load_sweep_spec(sweep_spec_path);
        if (sweep_workers > 0) spec.workers = sweep_workers;
        if (sweep_seed_set) spec.base.master_seed = sweep_seed;
        const SweepOutput out = run_sweep(spec);
        const std::string summary =
            sweep_summary.empty() ? summary_path_for(sweep_out) : sweep_summary;
        write_sweep_files(out, sweep_out, summary);
        std::cout << "wrote " << out.rows.size() << " rows to " << sweep_out
                  << " (summary: " << summary << ")\n";
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CrossCheckError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
