#pragma once

#include <cstdint>
#include <vector>

#include "d2dalloc/model.hpp"
#include "d2dalloc/random.hpp"

namespace d2dalloc {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// Scenario generator configuration. Geometry: the BS sits at the origin,
// cellular devices are uniform over the cell disc, D2D transmitters are
// uniform within a cluster disc around a uniformly drawn cluster center, and
// each D2D receiver is uniform within the pair distance of its transmitter.
// Gains follow K * beta * zeta * d^(-alpha) with unit-mean exponential
// small-scale fading beta (fresh per channel and ordered node pair) and
// log-normal shadowing zeta (one draw per ordered node pair).
//
// The numeric defaults below are this implementation's defaults, not values
// taken from any external measurement campaign; every experiment records the
// full configuration next to its results.
struct GenConfig {
    double cell_radius_m = 500.0;
    double d2d_cluster_radius_m = 150.0;
    double d2d_pair_distance_max_m = 50.0;
    int n_clusters = 1;

    int n_uc = 1;
    int n_dc = 1;
    int n_d = 2;
    int m_u = 2;
    int m_d = 2;

    double path_loss_constant = 1e-3;  // gain at 1 m before fading
    double path_loss_exponent = 3.5;
    double shadow_sigma_db = 8.0;

    double noise_w = 3.9810717055349695e-15;  // -114 dBm
    double power_cellular_w = 0.2;
    double power_d2d_w = 0.2;
    double bs_total_power_w = 40.0;

    double weight_cellular = 1.0;
    double weight_d2d = 1.0;
    double sinr_min_cellular_db = 0.0;
    double sinr_min_d2d_db = 0.0;

    std::uint64_t master_seed = 1;

    int num_nodes() const { return 1 + n_uc + n_dc + 2 * n_d; }

    // Throws std::invalid_argument on a broken invariant.
    void validate() const;
};

// Node positions in meters, BS first. Consumes the "placement" substream.
std::vector<Point> place_nodes(const GenConfig& cfg, RandomStream& stream);

// Deterministic part of the gain model: K * max(d, 1m)^(-alpha). The 1 m
// clamp avoids the path-loss singularity at d -> 0.
double path_gain_deterministic(const GenConfig& cfg, double distance_m);

// One full gain draw K * beta * zeta * d^(-alpha); beta comes from the
// "fading" substream, zeta from "shadowing".
double sample_gain(const GenConfig& cfg, RandomStream& stream,
                   double distance_m);

// Fully populated scenario; a pure function of cfg (including master_seed).
Scenario generate(const GenConfig& cfg);

}  // namespace d2dalloc
