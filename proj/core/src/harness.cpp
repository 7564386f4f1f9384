#include "d2dalloc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "d2dalloc/dp.hpp"
#include "d2dalloc/exhaustive.hpp"
#include "d2dalloc/greedy.hpp"
#include "d2dalloc/io.hpp"
#include "d2dalloc/random.hpp"

namespace d2dalloc {

namespace {

constexpr double kCheckTol = 1e-9;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void count_modes(const Scenario& s, const Assignment& a, ResultRow& row) {
    row.n_cell_mode = row.n_d2d_mode = row.n_inactive = 0;
    for (LinkId j = s.num_cellular() + 1; j <= s.num_links(); ++j) {
        if (!a.active(j))
            ++row.n_inactive;
        else if (a.mode(j))
            ++row.n_cell_mode;
        else
            ++row.n_d2d_mode;
    }
}

struct TaggedResult {
    AlgoSpec algo;
    ResultRow row;
    bool has_result = false;
    SolveResult result;
};

void cross_check(const Scenario& s, const std::vector<TaggedResult>& runs) {
    auto complain = [](const std::string& msg) {
        throw CrossCheckError("cross check failed: " + msg);
    };
    for (const TaggedResult& r : runs) {
        if (!r.has_result || !r.result.feasible) continue;
        if (!check_feasible(s, r.result.assignment).ok())
            complain(r.algo.tag() + " returned an infeasible assignment");
        if (std::fabs(objective(s, r.result.assignment) - r.result.objective) >
            kCheckTol)
            complain(r.algo.tag() + " objective does not re-score");
        if (r.algo.name == "dp" && !r.result.stats.state_bound_ok)
            complain("dp exceeded its state-count bound");
    }
    auto find = [&](const char* name, bool force, bool restrict_sharing)
        -> const TaggedResult* {
        for (const TaggedResult& r : runs)
            if (r.has_result && r.algo.name == name &&
                r.algo.force_d2d_mode == force &&
                r.algo.restrict_sharing == restrict_sharing)
                return &r;
        return nullptr;
    };

    const TaggedResult* dp = find("dp", false, false);
    const TaggedResult* dp_forced = find("dp", true, false);
    const TaggedResult* ex = find("exhaustive", false, false);
    const TaggedResult* ex_forced = find("exhaustive", true, false);
    const TaggedResult* ex_restricted = find("exhaustive", false, true);
    const TaggedResult* greedy = find("greedy", false, false);
    const TaggedResult* greedy_restricted = find("greedy", false, true);

    auto value = [](const TaggedResult* r) {
        return r->result.feasible ? r->result.objective : -1.0;
    };
    if (dp && ex) {
        if (dp->result.feasible != ex->result.feasible)
            complain("dp and exhaustive disagree on feasibility");
        if (dp->result.feasible &&
            std::fabs(value(dp) - value(ex)) > kCheckTol)
            complain("dp and exhaustive objectives differ");
    }
    if (dp_forced && ex_forced) {
        if (dp_forced->result.feasible != ex_forced->result.feasible)
            complain("forced dp and exhaustive disagree on feasibility");
        if (dp_forced->result.feasible &&
            std::fabs(value(dp_forced) - value(ex_forced)) > kCheckTol)
            complain("forced dp and exhaustive objectives differ");
    }
    if (dp && dp_forced && dp_forced->result.feasible &&
        value(dp) < value(dp_forced) - kCheckTol)
        complain("joint dp lost to its channel-assignment-only restriction");
    if (dp && greedy && greedy->result.feasible) {
        if (!dp->result.feasible)
            complain("greedy found a solution where dp reported none");
        else if (value(greedy) > value(dp) + kCheckTol)
            complain("greedy exceeded the dp optimum");
    }
    if (greedy && greedy_restricted && greedy_restricted->result.feasible &&
        greedy->result.feasible &&
        value(greedy) < value(greedy_restricted) - kCheckTol)
        complain("unrestricted greedy lost to the restricted baseline");
    if (ex && ex_restricted && ex_restricted->result.feasible &&
        ex->result.feasible &&
        value(ex) < value(ex_restricted) - kCheckTol)
        complain("unrestricted optimum lost to the restricted baseline");
}

}  // namespace

std::string AlgoSpec::tag() const {
    std::string out = name;
    if (force_d2d_mode) out += "+force-d2d-mode";
    if (restrict_sharing) out += "+restrict-sharing";
    if (per_hop_qos) out += "+per-hop-qos";
    return out;
}

AlgoSpec AlgoSpec::parse(const std::string& tag) {
    AlgoSpec spec;
    std::vector<std::string> parts;
    std::size_t from = 0;
    while (from <= tag.size()) {
        const std::size_t plus = tag.find('+', from);
        parts.push_back(tag.substr(from, plus - from));
        if (plus == std::string::npos) break;
        from = plus + 1;
    }
    spec.name = parts.front();
    if (spec.name != "dp" && spec.name != "greedy" &&
        spec.name != "exhaustive")
        throw std::invalid_argument("unknown algorithm '" + spec.name + "'");
    for (std::size_t p = 1; p < parts.size(); ++p) {
        const std::string& opt = parts[p];
        if (opt == "force-d2d-mode")
            spec.force_d2d_mode = true;
        else if (opt == "restrict-sharing")
            spec.restrict_sharing = true;
        else if (opt == "per-hop-qos")
            spec.per_hop_qos = true;
        else
            throw std::invalid_argument("unknown algorithm option '" + opt +
                                        "'");
    }
    if (spec.force_d2d_mode && spec.name == "greedy")
        throw std::invalid_argument("greedy has no force-d2d-mode variant");
    if (spec.restrict_sharing && spec.name == "dp")
        throw std::invalid_argument("dp has no restrict-sharing variant");
    if (spec.per_hop_qos && spec.name != "dp")
        throw std::invalid_argument("per-hop-qos applies to dp only");
    return spec;
}

SolveResult run_algo(const Scenario& s, const AlgoSpec& algo,
                     const RunOptions& run) {
    if (algo.name == "dp") {
        DpOptions opts;
        opts.force_d2d_mode_only = algo.force_d2d_mode;
        opts.per_hop_qos = algo.per_hop_qos;
        opts.state_budget = run.dp_state_budget;
        return dp_solve(s, opts);
    }
    if (algo.name == "greedy") {
        GreedyOptions opts;
        opts.restrict_one_d2d_per_channel = algo.restrict_sharing;
        return greedy_solve(s, opts);
    }
    if (algo.name == "exhaustive") {
        EnumOptions opts;
        opts.restrict_one_d2d_per_channel = algo.restrict_sharing;
        opts.force_d2d_mode_only = algo.force_d2d_mode;
        opts.budget = run.enum_budget;
        return exhaustive_solve(s, opts);
    }
    throw std::invalid_argument("unknown algorithm '" + algo.name + "'");
}

std::vector<ResultRow> run_compare(const Scenario& s,
                                   const std::vector<AlgoSpec>& algos,
                                   const RunOptions& run) {
    std::vector<TaggedResult> runs;
    runs.reserve(algos.size());
    for (const AlgoSpec& algo : algos) {
        TaggedResult tr;
        tr.algo = algo;
        tr.row.algo = algo.tag();
        try {
            tr.result = run_algo(s, algo, run);
            tr.has_result = true;
            tr.row.solved = true;
            tr.row.feasible = tr.result.feasible;
            tr.row.objective = tr.result.objective;
            tr.row.states_visited = tr.result.stats.states_visited;
            tr.row.wall_time_ms = tr.result.stats.wall_time_ms;
            count_modes(s, tr.result.assignment, tr.row);
        } catch (const BudgetError& e) {
            tr.row.error = e.what();
        }
        runs.push_back(std::move(tr));
    }
    cross_check(s, runs);
    std::vector<ResultRow> rows;
    rows.reserve(runs.size());
    for (TaggedResult& tr : runs) rows.push_back(std::move(tr.row));
    return rows;
}

void SweepSpec::validate() const {
    base.validate();
    if (swept_param != "n_d" && swept_param != "d2d_pair_distance_max_m" &&
        swept_param != "d2d_cluster_radius_m")
        throw std::invalid_argument("sweep: unknown swept_param '" +
                                    swept_param + "'");
    if (values.empty()) throw std::invalid_argument("sweep: no values");
    if (seeds_per_point < 1)
        throw std::invalid_argument("sweep: seeds_per_point must be >= 1");
    if (algos.empty()) throw std::invalid_argument("sweep: no algorithms");
    if (workers < 1) throw std::invalid_argument("sweep: workers must be >= 1");
    for (double v : values) {
        if (swept_param == "n_d" &&
            (v < 0.0 || v != std::floor(v) || v > 64.0))
            throw std::invalid_argument("sweep: n_d values must be small integers");
        if (swept_param != "n_d" && !(v > 0.0))
            throw std::invalid_argument("sweep: swept values must be positive");
    }
}

SweepSpec sweep_spec_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw io::IoError("invalid JSON in sweep spec");
    if (!j.is_object()) throw io::IoError("sweep spec: expected an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "base" && key != "swept_param" && key != "values" &&
            key != "seeds_per_point" && key != "algos" && key != "workers" &&
            key != "enum_budget" && key != "dp_state_budget")
            throw io::IoError("sweep spec: unknown key '" + key + "'");
    }
    SweepSpec spec;
    if (j.contains("base"))
        spec.base = io::gen_config_from_json(j.at("base").dump());
    if (j.contains("swept_param"))
        spec.swept_param = j.at("swept_param").get<std::string>();
    if (j.contains("values"))
        spec.values = j.at("values").get<std::vector<double>>();
    if (j.contains("seeds_per_point"))
        spec.seeds_per_point = j.at("seeds_per_point").get<int>();
    if (j.contains("algos"))
        for (const auto& tag : j.at("algos"))
            spec.algos.push_back(AlgoSpec::parse(tag.get<std::string>()));
    if (j.contains("workers")) spec.workers = j.at("workers").get<int>();
    if (j.contains("enum_budget"))
        spec.run.enum_budget = j.at("enum_budget").get<std::uint64_t>();
    if (j.contains("dp_state_budget"))
        spec.run.dp_state_budget =
            j.at("dp_state_budget").get<std::uint64_t>();
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw io::IoError(std::string("sweep spec: ") + e.what());
    }
    return spec;
}

SweepSpec load_sweep_spec(const std::string& path) {
    return sweep_spec_from_json(io::read_file(io::resolve_input_path(path)));
}

const char* const kRowCsvHeader =
    "swept_param,swept_value,seed,algo,objective,feasible,n_cell_mode,"
    "n_d2d_mode,n_inactive,states_visited,wall_time_ms";

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << kRowCsvHeader << "\n";
    for (const ResultRow& r : rows) {
        out << r.swept_param << ',' << format_double(r.swept_value) << ','
            << r.seed << ',' << r.algo << ','
            << (r.feasible ? format_double(r.objective) : std::string()) << ','
            << (r.feasible ? "true" : "false") << ',' << r.n_cell_mode << ','
            << r.n_d2d_mode << ',' << r.n_inactive << ',' << r.states_visited
            << ',';
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", r.wall_time_ms);
        out << buf << "\n";
    }
    return out.str();
}

namespace {

GenConfig config_for_point(const SweepSpec& spec, double value,
                           std::uint64_t point_idx, std::uint64_t seed_idx) {
    GenConfig cfg = spec.base;
    if (spec.swept_param == "n_d")
        cfg.n_d = static_cast<int>(value);
    else if (spec.swept_param == "d2d_pair_distance_max_m")
        cfg.d2d_pair_distance_max_m = value;
    else
        cfg.d2d_cluster_radius_m = value;
    cfg.master_seed = RandomStream::mix(
        RandomStream::mix(spec.base.master_seed + point_idx) + seed_idx);
    return cfg;
}

std::string summarize(const std::vector<ResultRow>& rows,
                      const SweepSpec& spec) {
    std::ostringstream out;
    out << "swept_param,swept_value,algo,rows,solved,feasible,objective_mean,"
           "objective_std\n";
    for (std::size_t p = 0; p < spec.values.size(); ++p) {
        for (const AlgoSpec& algo : spec.algos) {
            const std::string tag = algo.tag();
            int total = 0, solved = 0, feasible = 0;
            double sum = 0.0, sum_sq = 0.0;
            for (const ResultRow& r : rows) {
                if (r.swept_value != spec.values[p] || r.algo != tag) continue;
                ++total;
                if (r.solved) ++solved;
                if (!r.feasible) continue;
                ++feasible;
                sum += r.objective;
                sum_sq += r.objective * r.objective;
            }
            const double mean = feasible > 0 ? sum / feasible : 0.0;
            double std_dev = 0.0;
            if (feasible > 1) {
                const double var =
                    (sum_sq - sum * sum / feasible) / (feasible - 1);
                std_dev = var > 0.0 ? std::sqrt(var) : 0.0;
            }
            out << spec.swept_param << ','
                << format_double(spec.values[p]) << ',' << tag << ','
                << total << ',' << solved << ',' << feasible << ','
                << (feasible > 0 ? format_double(mean) : std::string()) << ','
                << (feasible > 1 ? format_double(std_dev) : std::string())
                << "\n";
        }
    }
    return out.str();
}

}  // namespace

SweepOutput run_sweep(const SweepSpec& spec) {
    spec.validate();
    struct Task {
        std::size_t point;
        int seed;
    };
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < spec.values.size(); ++p)
        for (int k = 0; k < spec.seeds_per_point; ++k)
            tasks.push_back({p, k});

    const std::size_t per_task = spec.algos.size();
    std::vector<ResultRow> rows(tasks.size() * per_task);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size() || failed.load()) break;
            const Task& task = tasks[t];
            const double value = spec.values[task.point];
            try {
                const GenConfig cfg = config_for_point(
                    spec, value, task.point,
                    static_cast<std::uint64_t>(task.seed));
                const Scenario s = generate(cfg);
                std::vector<ResultRow> batch =
                    run_compare(s, spec.algos, spec.run);
                for (std::size_t a = 0; a < batch.size(); ++a) {
                    batch[a].swept_param = spec.swept_param;
                    batch[a].swept_value = value;
                    batch[a].seed = static_cast<std::uint64_t>(task.seed);
                    rows[t * per_task + a] = std::move(batch[a]);
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                failed.store(true);
                if (!failure) failure = std::current_exception();
            }
        }
    };

    const std::size_t thread_count =
        std::min(static_cast<std::size_t>(spec.workers),
                 std::max<std::size_t>(tasks.size(), 1));
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (std::size_t w = 0; w < thread_count; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    SweepOutput out;
    out.rows = std::move(rows);
    out.raw_csv = rows_to_csv(out.rows);
    out.summary_csv = summarize(out.rows, spec);
    return out;
}

void write_sweep_files(const SweepOutput& out, const std::string& raw_path,
                       const std::string& summary_path) {
    io::write_file_atomic(raw_path, out.raw_csv);
    io::write_file_atomic(summary_path, out.summary_csv);
}

}  // namespace d2dalloc
