#include "d2dalloc/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace d2dalloc::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw IoError(msg); }

json parse(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(std::string("invalid JSON in ") + what);
    return j;
}

// Catches typos early: every key in the object must be known.
void expect_keys(const json& obj, const char* what,
                 std::initializer_list<const char*> keys) {
    if (!obj.is_object()) fail(std::string(what) + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* k : keys)
            if (key == k) {
                known = true;
                break;
            }
        if (!known) fail(std::string(what) + ": unknown key '" + key + "'");
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(std::string("bad value for '") + key + "'");
    }
}

template <typename T>
T get_req(const json& obj, const char* key, const char* what) {
    if (!obj.contains(key))
        fail(std::string(what) + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(std::string(what) + ": bad value for '" + key + "'");
    }
}

const char* kind_name(LinkKind k) {
    switch (k) {
    case LinkKind::UplinkCellular: return "uplink_cellular";
    case LinkKind::DownlinkCellular: return "downlink_cellular";
    case LinkKind::D2D: return "d2d";
    }
    return "unknown";
}

LinkKind kind_from_name(const std::string& name) {
    if (name == "uplink_cellular") return LinkKind::UplinkCellular;
    if (name == "downlink_cellular") return LinkKind::DownlinkCellular;
    if (name == "d2d") return LinkKind::D2D;
    fail("unknown link kind '" + name + "'");
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path dir =
        target.has_parent_path() ? target.parent_path() : fs::path(".");
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail("cannot open '" + tmp.string() + "' for writing");
        out.write(contents.data(),
                  static_cast<std::streamsize>(contents.size()));
        if (!out) fail("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, target, ec);
    if (ec) fail("cannot rename '" + tmp.string() + "' to '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string resolve_input_path(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::exists(path)) return path;
    if (const char* dir = std::getenv("D2DALLOC_CONFIG_DIR")) {
        const fs::path candidate = fs::path(dir) / path;
        if (fs::exists(candidate)) return candidate.string();
    }
    fail("input file '" + path + "' not found");
}

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["counts"] = {{"n_uc", s.n_uc},
                   {"n_dc", s.n_dc},
                   {"n_d", s.n_d},
                   {"m_u", s.m_u},
                   {"m_d", s.m_d}};
    j["noise_w"] = s.noise_w;
    j["bs_total_power_w"] = s.bs_total_power_w;
    j["num_nodes"] = s.num_nodes;
    json links = json::array();
    for (const Link& l : s.links) {
        json lj;
        lj["id"] = l.id;
        lj["kind"] = kind_name(l.kind);
        if (l.kind == LinkKind::D2D) {
            lj["tx_device"] = l.tx_device;
            lj["rx_device"] = l.rx_device;
            lj["power_d2d_w"] = l.power_d2d_w;
        } else {
            lj["device"] = l.device;
        }
        lj["power_cellular_w"] = l.power_cellular_w;
        lj["weight"] = l.weight;
        lj["sinr_min"] = l.sinr_min;
        links.push_back(std::move(lj));
    }
    j["links"] = std::move(links);
    json gains = json::array();
    for (const auto& table : s.gains) {
        json channel = json::array();
        for (int a = 0; a < s.num_nodes; ++a) {
            json row = json::array();
            for (int b = 0; b < s.num_nodes; ++b)
                row.push_back(table[static_cast<std::size_t>(a) * s.num_nodes + b]);
            channel.push_back(std::move(row));
        }
        gains.push_back(std::move(channel));
    }
    j["gains"] = std::move(gains);
    if (!s.positions.empty()) {
        json pos = json::array();
        for (const Point& p : s.positions) pos.push_back({p.x, p.y});
        j["positions"] = std::move(pos);
    }
    return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
    const json j = parse(text, "scenario");
    expect_keys(j, "scenario",
                {"counts", "noise_w", "bs_total_power_w", "num_nodes",
                 "links", "gains", "positions"});
    Scenario s;
    const json counts = get_req<json>(j, "counts", "scenario");
    expect_keys(counts, "scenario.counts", {"n_uc", "n_dc", "n_d", "m_u", "m_d"});
    s.n_uc = get_req<int>(counts, "n_uc", "scenario.counts");
    s.n_dc = get_req<int>(counts, "n_dc", "scenario.counts");
    s.n_d = get_req<int>(counts, "n_d", "scenario.counts");
    s.m_u = get_req<int>(counts, "m_u", "scenario.counts");
    s.m_d = get_req<int>(counts, "m_d", "scenario.counts");
    s.noise_w = get_req<double>(j, "noise_w", "scenario");
    s.bs_total_power_w = get_req<double>(j, "bs_total_power_w", "scenario");

    const json links = get_req<json>(j, "links", "scenario");
    if (!links.is_array()) fail("scenario: links must be an array");
    for (const json& lj : links) {
        expect_keys(lj, "scenario.link",
                    {"id", "kind", "device", "tx_device", "rx_device",
                     "power_cellular_w", "power_d2d_w", "weight", "sinr_min",
                     "sinr_min_db"});
        Link l;
        l.id = get_req<int>(lj, "id", "link");
        l.kind = kind_from_name(get_req<std::string>(lj, "kind", "link"));
        l.device = get_or<int>(lj, "device", 0);
        l.tx_device = get_or<int>(lj, "tx_device", 0);
        l.rx_device = get_or<int>(lj, "rx_device", 0);
        l.power_cellular_w = get_or<double>(lj, "power_cellular_w", 0.0);
        l.power_d2d_w = get_or<double>(lj, "power_d2d_w", 0.0);
        l.weight = get_or<double>(lj, "weight", 1.0);
        if (lj.contains("sinr_min_db"))
            l.sinr_min = db_to_linear(get_req<double>(lj, "sinr_min_db", "link"));
        else
            l.sinr_min = get_or<double>(lj, "sinr_min", 1.0);
        s.links.push_back(l);
    }

    s.num_nodes = get_or<int>(j, "num_nodes", 0);
    const json gains = get_req<json>(j, "gains", "scenario");
    if (!gains.is_array()) fail("scenario: gains must be an array");
    for (const json& channel : gains) {
        if (!channel.is_array() || channel.empty())
            fail("scenario: each gain table must be a non-empty matrix");
        const int nodes = static_cast<int>(channel.size());
        if (s.num_nodes == 0) s.num_nodes = nodes;
        if (nodes != s.num_nodes)
            fail("scenario: gain tables disagree about the node count");
        std::vector<double> table;
        table.reserve(static_cast<std::size_t>(nodes) * nodes);
        for (const json& row : channel) {
            if (!row.is_array() || static_cast<int>(row.size()) != nodes)
                fail("scenario: gain rows must be square");
            for (const json& v : row) table.push_back(v.get<double>());
        }
        s.gains.push_back(std::move(table));
    }
    if (j.contains("positions")) {
        for (const json& p : j.at("positions")) {
            if (!p.is_array() || p.size() != 2)
                fail("scenario: positions must be [x, y] pairs");
            s.positions.push_back({p[0].get<double>(), p[1].get<double>()});
        }
    }
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        fail(std::string("scenario: ") + e.what());
    }
    return s;
}

void save_scenario(const Scenario& s, const std::string& path) {
    write_file_atomic(path, scenario_to_json(s));
}

Scenario load_scenario(const std::string& path) {
    return scenario_from_json(read_file(resolve_input_path(path)));
}

std::string gen_config_to_json(const GenConfig& cfg) {
    json j;
    j["cell_radius_m"] = cfg.cell_radius_m;
    j["d2d_cluster_radius_m"] = cfg.d2d_cluster_radius_m;
    j["d2d_pair_distance_max_m"] = cfg.d2d_pair_distance_max_m;
    j["n_clusters"] = cfg.n_clusters;
    j["counts"] = {{"n_uc", cfg.n_uc},
                   {"n_dc", cfg.n_dc},
                   {"n_d", cfg.n_d},
                   {"m_u", cfg.m_u},
                   {"m_d", cfg.m_d}};
    j["path_loss_constant"] = cfg.path_loss_constant;
    j["path_loss_exponent"] = cfg.path_loss_exponent;
    j["shadow_sigma_db"] = cfg.shadow_sigma_db;
    j["noise_w"] = cfg.noise_w;
    j["powers"] = {{"cellular_w", cfg.power_cellular_w},
                   {"d2d_w", cfg.power_d2d_w},
                   {"bs_total_w", cfg.bs_total_power_w}};
    j["weights"] = {{"cellular", cfg.weight_cellular},
                    {"d2d", cfg.weight_d2d}};
    j["sinr_min_db"] = {{"cellular", cfg.sinr_min_cellular_db},
                        {"d2d", cfg.sinr_min_d2d_db}};
    j["master_seed"] = cfg.master_seed;
    return j.dump(2) + "\n";
}

GenConfig gen_config_from_json(const std::string& text) {
    const json j = parse(text, "gen config");
    expect_keys(j, "gen config",
                {"cell_radius_m", "d2d_cluster_radius_m",
                 "d2d_pair_distance_max_m", "n_clusters", "counts",
                 "path_loss_constant", "path_loss_exponent",
                 "shadow_sigma_db", "noise_w", "powers", "weights",
                 "sinr_min_db", "master_seed"});
    GenConfig cfg;
    cfg.cell_radius_m = get_or(j, "cell_radius_m", cfg.cell_radius_m);
    cfg.d2d_cluster_radius_m =
        get_or(j, "d2d_cluster_radius_m", cfg.d2d_cluster_radius_m);
    cfg.d2d_pair_distance_max_m =
        get_or(j, "d2d_pair_distance_max_m", cfg.d2d_pair_distance_max_m);
    cfg.n_clusters = get_or(j, "n_clusters", cfg.n_clusters);
    if (j.contains("counts")) {
        const json counts = j.at("counts");
        expect_keys(counts, "gen config.counts",
                    {"n_uc", "n_dc", "n_d", "m_u", "m_d"});
        cfg.n_uc = get_or(counts, "n_uc", cfg.n_uc);
        cfg.n_dc = get_or(counts, "n_dc", cfg.n_dc);
        cfg.n_d = get_or(counts, "n_d", cfg.n_d);
        cfg.m_u = get_or(counts, "m_u", cfg.m_u);
        cfg.m_d = get_or(counts, "m_d", cfg.m_d);
    }
    cfg.path_loss_constant =
        get_or(j, "path_loss_constant", cfg.path_loss_constant);
    cfg.path_loss_exponent =
        get_or(j, "path_loss_exponent", cfg.path_loss_exponent);
    cfg.shadow_sigma_db = get_or(j, "shadow_sigma_db", cfg.shadow_sigma_db);
    cfg.noise_w = get_or(j, "noise_w", cfg.noise_w);
    if (j.contains("powers")) {
        const json p = j.at("powers");
        expect_keys(p, "gen config.powers",
                    {"cellular_w", "d2d_w", "bs_total_w"});
        cfg.power_cellular_w = get_or(p, "cellular_w", cfg.power_cellular_w);
        cfg.power_d2d_w = get_or(p, "d2d_w", cfg.power_d2d_w);
        cfg.bs_total_power_w = get_or(p, "bs_total_w", cfg.bs_total_power_w);
    }
    if (j.contains("weights")) {
        const json w = j.at("weights");
        expect_keys(w, "gen config.weights", {"cellular", "d2d"});
        cfg.weight_cellular = get_or(w, "cellular", cfg.weight_cellular);
        cfg.weight_d2d = get_or(w, "d2d", cfg.weight_d2d);
    }
    if (j.contains("sinr_min_db")) {
        const json f = j.at("sinr_min_db");
        expect_keys(f, "gen config.sinr_min_db", {"cellular", "d2d"});
        cfg.sinr_min_cellular_db =
            get_or(f, "cellular", cfg.sinr_min_cellular_db);
        cfg.sinr_min_d2d_db = get_or(f, "d2d", cfg.sinr_min_d2d_db);
    }
    cfg.master_seed = get_or(j, "master_seed", cfg.master_seed);
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        fail(std::string("gen config: ") + e.what());
    }
    return cfg;
}

GenConfig load_gen_config(const std::string& path) {
    return gen_config_from_json(read_file(resolve_input_path(path)));
}

std::string result_to_json(const Scenario& s, const SolveResult& r) {
    json j;
    j["feasible"] = r.feasible;
    if (r.feasible)
        j["objective"] = r.objective;
    else
        j["objective"] = nullptr;
    json rho = json::array();
    for (ChannelId i = 1; i <= s.num_channels(); ++i)
        for (LinkMask m = r.assignment.on_channel[static_cast<std::size_t>(i - 1)];
             m != 0;)
            rho.push_back({i, pop_lowest(m)});
    j["rho"] = std::move(rho);
    json x = json::array();
    for (LinkMask m = r.assignment.cellular_mode & s.d2d_links_mask(); m != 0;)
        x.push_back(pop_lowest(m));
    j["x"] = std::move(x);
    j["per_link_rate"] = r.per_link_rate;
    j["stats"] = {{"states_visited", r.stats.states_visited},
                  {"decisions_enumerated", r.stats.decisions_enumerated},
                  {"wall_time_ms", r.stats.wall_time_ms},
                  {"state_bound_ok", r.stats.state_bound_ok}};
    return j.dump(2) + "\n";
}

SolveResult result_from_json(const Scenario& s, const std::string& text) {
    const json j = parse(text, "result");
    expect_keys(j, "result",
                {"feasible", "objective", "rho", "x", "per_link_rate",
                 "stats"});
    SolveResult r;
    r.feasible = get_req<bool>(j, "feasible", "result");
    if (r.feasible) r.objective = get_req<double>(j, "objective", "result");
    r.assignment = Assignment::empty_for(s);
    for (const json& pair : get_req<json>(j, "rho", "result")) {
        if (!pair.is_array() || pair.size() != 2)
            fail("result: rho entries must be (channel, link) pairs");
        const ChannelId i = pair[0].get<int>();
        const LinkId link = pair[1].get<int>();
        if (i < 1 || i > s.num_channels() || link < 1 || link > s.num_links())
            fail("result: rho entry out of range");
        r.assignment.set(i, link);
    }
    for (const json& v : get_req<json>(j, "x", "result")) {
        const LinkId link = v.get<int>();
        if (!s.is_d2d(link)) fail("result: x entries must be D2D link ids");
        r.assignment.set_mode(link, true);
    }
    if (j.contains("per_link_rate"))
        r.per_link_rate = j.at("per_link_rate").get<std::vector<double>>();
    if (j.contains("stats")) {
        const json st = j.at("stats");
        r.stats.states_visited = get_or<std::uint64_t>(st, "states_visited", 0);
        r.stats.decisions_enumerated =
            get_or<std::uint64_t>(st, "decisions_enumerated", 0);
        r.stats.wall_time_ms = get_or<double>(st, "wall_time_ms", 0.0);
        r.stats.state_bound_ok = get_or<bool>(st, "state_bound_ok", true);
    }
    return r;
}

void save_result(const Scenario& s, const SolveResult& r,
                 const std::string& path) {
    write_file_atomic(path, result_to_json(s, r));
}

}  // namespace d2dalloc::io
