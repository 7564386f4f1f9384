#include "d2dalloc/scenario_gen.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace d2dalloc {

namespace {

void fail(const std::string& msg) { throw std::invalid_argument(msg); }

double distance(Point a, Point b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

double shadow_linear(const GenConfig& cfg, RandomStream::Substream& sub) {
    return db_to_linear(sub.normal(0.0, cfg.shadow_sigma_db));
}

}  // namespace

void GenConfig::validate() const {
    if (!(cell_radius_m > 0.0) || !(d2d_cluster_radius_m > 0.0) ||
        !(d2d_pair_distance_max_m > 0.0))
        fail("gen config: radii must be positive");
    if (n_clusters < 1) fail("gen config: n_clusters must be at least 1");
    if (n_uc < 0 || n_dc < 0 || n_d < 0 || m_u < 0 || m_d < 0)
        fail("gen config: negative counts");
    if (n_uc + n_dc + n_d == 0) fail("gen config: no links requested");
    if (n_uc + n_dc + n_d > 64) fail("gen config: more than 64 links");
    if (m_u < n_uc) fail("gen config: m_u must be at least n_uc");
    if (m_d < n_dc) fail("gen config: m_d must be at least n_dc");
    if (!(path_loss_constant > 0.0)) fail("gen config: path_loss_constant must be positive");
    if (!(path_loss_exponent > 0.0)) fail("gen config: path_loss_exponent must be positive");
    if (shadow_sigma_db < 0.0) fail("gen config: shadow_sigma_db must be non-negative");
    if (!(noise_w > 0.0)) fail("gen config: noise_w must be positive");
    if (!(power_cellular_w > 0.0) || !(power_d2d_w > 0.0) ||
        !(bs_total_power_w > 0.0))
        fail("gen config: powers must be positive");
    if (weight_cellular < 0.0 || weight_d2d < 0.0)
        fail("gen config: weights must be non-negative");
}

std::vector<Point> place_nodes(const GenConfig& cfg, RandomStream& stream) {
    auto& sub = stream.substream("placement");
    std::vector<Point> pos;
    pos.reserve(static_cast<std::size_t>(cfg.num_nodes()));
    pos.push_back({0.0, 0.0});  // base station

    for (int i = 0; i < cfg.n_uc + cfg.n_dc; ++i)
        pos.push_back(sub.in_disc({0.0, 0.0}, cfg.cell_radius_m));

    std::vector<Point> centers;
    centers.reserve(static_cast<std::size_t>(cfg.n_clusters));
    for (int c = 0; c < cfg.n_clusters; ++c)
        centers.push_back(sub.in_disc({0.0, 0.0}, cfg.cell_radius_m));

    for (int p = 0; p < cfg.n_d; ++p) {
        const Point center = centers[static_cast<std::size_t>(p % cfg.n_clusters)];
        const Point tx = sub.in_disc(center, cfg.d2d_cluster_radius_m);
        const Point rx = sub.in_disc(tx, cfg.d2d_pair_distance_max_m);
        pos.push_back(tx);
        pos.push_back(rx);
    }
    return pos;
}

double path_gain_deterministic(const GenConfig& cfg, double distance_m) {
    const double d = std::max(distance_m, 1.0);
    return cfg.path_loss_constant * std::pow(d, -cfg.path_loss_exponent);
}

double sample_gain(const GenConfig& cfg, RandomStream& stream,
                   double distance_m) {
    const double beta = stream.substream("fading").exponential_unit_mean();
    const double zeta = shadow_linear(cfg, stream.substream("shadowing"));
    return path_gain_deterministic(cfg, distance_m) * beta * zeta;
}

Scenario generate(const GenConfig& cfg) {
    cfg.validate();
    RandomStream stream(cfg.master_seed);

    Scenario s;
    s.n_uc = cfg.n_uc;
    s.n_dc = cfg.n_dc;
    s.n_d = cfg.n_d;
    s.m_u = cfg.m_u;
    s.m_d = cfg.m_d;
    s.noise_w = cfg.noise_w;
    s.bs_total_power_w = cfg.bs_total_power_w;
    s.num_nodes = cfg.num_nodes();
    s.positions = place_nodes(cfg, stream);

    const double floor_c = db_to_linear(cfg.sinr_min_cellular_db);
    const double floor_d = db_to_linear(cfg.sinr_min_d2d_db);
    const int nc = cfg.n_uc + cfg.n_dc;
    for (int j = 1; j <= nc + cfg.n_d; ++j) {
        Link l;
        l.id = j;
        l.power_cellular_w = cfg.power_cellular_w;
        if (j <= nc) {
            l.kind = j <= cfg.n_uc ? LinkKind::UplinkCellular
                                   : LinkKind::DownlinkCellular;
            l.device = j;
            l.weight = cfg.weight_cellular;
            l.sinr_min = floor_c;
        } else {
            l.kind = LinkKind::D2D;
            l.tx_device = nc + 2 * (j - nc) - 1;
            l.rx_device = nc + 2 * (j - nc);
            l.power_d2d_w = cfg.power_d2d_w;
            l.weight = cfg.weight_d2d;
            l.sinr_min = floor_d;
        }
        s.links.push_back(l);
    }

    const int nodes = s.num_nodes;
    const std::size_t cells =
        static_cast<std::size_t>(nodes) * static_cast<std::size_t>(nodes);

    // Shadowing is geometry-driven: one draw per ordered node pair, shared
    // by every channel. Small-scale fading is frequency-selective: a fresh
    // draw per (channel, ordered pair).
    auto& shadow_sub = stream.substream("shadowing");
    std::vector<double> shadow(cells, 0.0);
    for (int a = 0; a < nodes; ++a)
        for (int b = 0; b < nodes; ++b)
            if (a != b)
                shadow[static_cast<std::size_t>(a) * nodes + b] =
                    shadow_linear(cfg, shadow_sub);

    auto& fading_sub = stream.substream("fading");
    s.gains.assign(static_cast<std::size_t>(cfg.m_u + cfg.m_d),
                   std::vector<double>(cells, 0.0));
    for (auto& table : s.gains) {
        for (int a = 0; a < nodes; ++a) {
            for (int b = 0; b < nodes; ++b) {
                if (a == b) continue;
                const std::size_t idx =
                    static_cast<std::size_t>(a) * nodes + b;
                const double beta = fading_sub.exponential_unit_mean();
                table[idx] = path_gain_deterministic(
                                 cfg, distance(s.positions[static_cast<std::size_t>(a)],
                                               s.positions[static_cast<std::size_t>(b)])) *
                             beta * shadow[idx];
            }
        }
    }

    s.validate();
    return s;
}

}  // namespace d2dalloc
