#pragma once
// Network geometry, mobility, PU band occupancy and the PU->SU channel:
// path loss, spatially correlated log-normal shadowing, Rayleigh multipath,
// adjacent-band leakage and AWGN.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "coopsense/rng.hpp"
#include "coopsense/scenario.hpp"

namespace coopsense {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(Point a, Point b);

struct Topology {
    std::vector<Point> su_positions;
    Point pu_position;
    std::vector<double> su_headings;  // radians in [0, 2*pi)
    double pu_heading = 0.0;
};

struct PuState {
    bool active = false;
    std::vector<int> occupied_bands;  // consecutive, ascending
    std::vector<int> adjacent_bands;  // ascending
    std::vector<int> vacant_bands;    // ascending

    enum class BandRole { kOccupied, kAdjacent, kVacant };
    BandRole role(int band) const;
};

struct ShadowField {
    std::vector<double> values_db;
};

Topology init_topology(const ScenarioConfig& cfg, RngStream& rng);

// Random-direction mobility: advance v*dt along the heading, reflect off the
// area boundary (mirroring the heading), then add uniform heading jitter.
Topology step_mobility(const Topology& topo, const ScenarioConfig& cfg, RngStream& rng);

// Moves one node by `step` metres inside [0, side]^2 with specular reflection.
void advance_with_reflection(Point& p, double& heading, double step, double side);

// 1 / (beta * d^alpha). Throws std::domain_error for d <= 0 or non-finite d.
double path_gain(double d_m, const ScenarioConfig& cfg);

// Distances below this are clamped before path_gain is evaluated.
inline constexpr double kMinLinkDistanceM = 1.0;

// K[a][b] = exp(-|p_a - p_b| / d_ref).
Eigen::MatrixXd correlation_matrix(std::span<const Point> positions, double d_ref_m);

// Lower Cholesky factor of K + jitter*I, escalating jitter from 1e-10 by x10
// up to 1e-6. Throws std::runtime_error if all attempts fail.
Eigen::MatrixXd correlated_factor(const Eigen::MatrixXd& k);

ShadowField sample_shadow_field(std::span<const Point> positions, const ScenarioConfig& cfg,
                                RngStream& rng);
// Same, reusing a precomputed Cholesky factor.
ShadowField sample_shadow_field(const Eigen::MatrixXd& factor, double sigma_db, RngStream& rng);

PuState sample_pu_state(const ScenarioConfig& cfg, RngStream& rng);
// Active state occupying bands [start, start + count).
PuState make_active_pu_state(int n_bands, int start, int count);
PuState make_inactive_pu_state(int n_bands);

// kappa^2 = P * path_gain(max(d, 1 m)) * 10^(-h/10), linear watts.
double mean_signal_power_w(const Topology& topo, const ShadowField& shadow, std::size_t su,
                           const ScenarioConfig& cfg);

// Fills `out` with y(m) for one (SU, band) pair.
void fill_received_samples(const Topology& topo, const PuState& pu, const ShadowField& shadow,
                           std::size_t su, int band, const ScenarioConfig& cfg, RngStream& rng,
                           std::span<std::complex<double>> out);

std::vector<std::complex<double>> received_samples(const Topology& topo, const PuState& pu,
                                                   const ShadowField& shadow, std::size_t su,
                                                   int band, const ScenarioConfig& cfg,
                                                   RngStream& rng);

}  // namespace coopsense
