#pragma once

#include <stdexcept>
#include <string>

#include "d2dalloc/model.hpp"
#include "d2dalloc/scenario_gen.hpp"

namespace d2dalloc::io {

class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Writes via a temporary file in the same directory plus a rename, so an
// interrupted writer never leaves a torn file behind.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

// Resolves an input path: taken as-is when it exists, otherwise looked up
// under $D2DALLOC_CONFIG_DIR. Throws IoError when neither resolves.
std::string resolve_input_path(const std::string& path);

// Scenario files: counts, noise, BS power, links, per-channel gain tables in
// [channel][tx][rx] order, optional node positions. Per-link SINR floors are
// stored linear ("sinr_min"); "sinr_min_db" is accepted on load.
std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);
void save_scenario(const Scenario& s, const std::string& path);
Scenario load_scenario(const std::string& path);

// Generator configs; dB-valued fields carry the _db suffix.
std::string gen_config_to_json(const GenConfig& cfg);
GenConfig gen_config_from_json(const std::string& text);
GenConfig load_gen_config(const std::string& path);

// Solver results: rho as (channel, link) pairs, x as the cellular-mode D2D
// link ids, objective (null when infeasible), per-link rates, stats.
std::string result_to_json(const Scenario& s, const SolveResult& r);
SolveResult result_from_json(const Scenario& s, const std::string& text);
void save_result(const Scenario& s, const SolveResult& r,
                 const std::string& path);

}  // namespace d2dalloc::io
