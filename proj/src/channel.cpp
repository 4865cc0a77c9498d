#include "coopsense/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace coopsense {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    // fmod can return exactly 2*pi after the correction above for tiny negatives
    return a >= kTwoPi ? 0.0 : a;
}

// Folds v into [0, side]; returns true if an odd number of reflections happened.
bool fold_into(double& v, double side) {
    if (v >= 0.0 && v <= side) return false;
    const double q = std::floor(v / side);
    const double r = v - q * side;
    const bool odd = std::fmod(std::abs(q), 2.0) == 1.0;
    v = odd ? side - r : r;
    v = std::clamp(v, 0.0, side);
    return odd;
}

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

PuState::BandRole PuState::role(int band) const {
    if (std::binary_search(occupied_bands.begin(), occupied_bands.end(), band)) {
        return BandRole::kOccupied;
    }
    if (std::binary_search(adjacent_bands.begin(), adjacent_bands.end(), band)) {
        return BandRole::kAdjacent;
    }
    return BandRole::kVacant;
}

Topology init_topology(const ScenarioConfig& cfg, RngStream& rng) {
    std::uniform_real_distribution<double> coord(0.0, cfg.area_side_m);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    Topology t;
    t.su_positions.resize(static_cast<std::size_t>(cfg.n_su));
    t.su_headings.resize(static_cast<std::size_t>(cfg.n_su));
    for (auto& p : t.su_positions) {
        p.x = coord(rng);
        p.y = coord(rng);
    }
    t.pu_position.x = coord(rng);
    t.pu_position.y = coord(rng);
    for (auto& h : t.su_headings) h = angle(rng);
    t.pu_heading = angle(rng);
    return t;
}

void advance_with_reflection(Point& p, double& heading, double step, double side) {
    p.x += step * std::cos(heading);
    p.y += step * std::sin(heading);
    if (fold_into(p.x, side)) heading = std::numbers::pi - heading;
    if (fold_into(p.y, side)) heading = -heading;
    heading = wrap_angle(heading);
}

Topology step_mobility(const Topology& topo, const ScenarioConfig& cfg, RngStream& rng) {
    const double jitter = cfg.heading_jitter_deg * std::numbers::pi / 180.0;
    std::uniform_real_distribution<double> turn(-jitter, jitter);
    const double step = cfg.step_distance_m();
    Topology next = topo;
    auto move = [&](Point& p, double& heading) {
        advance_with_reflection(p, heading, step, cfg.area_side_m);
        if (jitter > 0) heading = wrap_angle(heading + turn(rng));
    };
    for (std::size_t i = 0; i < next.su_positions.size(); ++i) {
        move(next.su_positions[i], next.su_headings[i]);
    }
    move(next.pu_position, next.pu_heading);
    return next;
}

double path_gain(double d_m, const ScenarioConfig& cfg) {
    if (!(d_m > 0.0) || !std::isfinite(d_m)) {
        throw std::domain_error("path_gain: distance must be positive and finite, got " +
                                std::to_string(d_m));
    }
    return 1.0 / (cfg.path_loss_constant * std::pow(d_m, cfg.path_loss_exponent));
}

Eigen::MatrixXd correlation_matrix(std::span<const Point> positions, double d_ref_m) {
    if (!(d_ref_m > 0.0)) throw std::invalid_argument("correlation_matrix: d_ref must be > 0");
    const auto n = static_cast<Eigen::Index>(positions.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        k(a, a) = 1.0;
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const double v = std::exp(-distance(positions[static_cast<std::size_t>(a)],
                                                positions[static_cast<std::size_t>(b)]) /
                                      d_ref_m);
            k(a, b) = v;
            k(b, a) = v;
        }
    }
    return k;
}

Eigen::MatrixXd correlated_factor(const Eigen::MatrixXd& k) {
    const auto n = k.rows();
    for (double jitter = 1e-10; jitter <= 1e-6 * 1.0001; jitter *= 10.0) {
        Eigen::LLT<Eigen::MatrixXd> llt(k + jitter * Eigen::MatrixXd::Identity(n, n));
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw std::runtime_error("shadow correlation matrix is not positive definite even with 1e-6 jitter");
}

ShadowField sample_shadow_field(const Eigen::MatrixXd& factor, double sigma_db, RngStream& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(factor.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    const Eigen::VectorXd k = factor.triangularView<Eigen::Lower>() * z;
    ShadowField field;
    field.values_db.resize(static_cast<std::size_t>(k.size()));
    for (Eigen::Index i = 0; i < k.size(); ++i) {
        field.values_db[static_cast<std::size_t>(i)] = sigma_db * k(i);
    }
    return field;
}

ShadowField sample_shadow_field(std::span<const Point> positions, const ScenarioConfig& cfg,
                                RngStream& rng) {
    return sample_shadow_field(correlated_factor(correlation_matrix(positions, cfg.d_ref_m)),
                               cfg.shadow_sigma_db, rng);
}

PuState make_inactive_pu_state(int n_bands) {
    PuState s;
    s.active = false;
    s.vacant_bands.resize(static_cast<std::size_t>(n_bands));
    for (int b = 0; b < n_bands; ++b) s.vacant_bands[static_cast<std::size_t>(b)] = b;
    return s;
}

PuState make_active_pu_state(int n_bands, int start, int count) {
    if (count < 1 || start < 0 || start + count > n_bands) {
        throw std::invalid_argument("make_active_pu_state: run outside the band plan");
    }
    PuState s;
    s.active = true;
    for (int b = 0; b < n_bands; ++b) {
        if (b >= start && b < start + count) s.occupied_bands.push_back(b);
        else if (b == start - 1 || b == start + count) s.adjacent_bands.push_back(b);
        else s.vacant_bands.push_back(b);
    }
    return s;
}

PuState sample_pu_state(const ScenarioConfig& cfg, RngStream& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (!(unit(rng) < cfg.pu_active_prob)) return make_inactive_pu_state(cfg.n_bands);
    std::uniform_int_distribution<int> width(cfg.n_bp_min, cfg.n_bp_max);
    const int count = width(rng);
    std::uniform_int_distribution<int> first(0, cfg.n_bands - count);
    return make_active_pu_state(cfg.n_bands, first(rng), count);
}

double mean_signal_power_w(const Topology& topo, const ShadowField& shadow, std::size_t su,
                           const ScenarioConfig& cfg) {
    const double d = std::max(distance(topo.su_positions.at(su), topo.pu_position),
                              kMinLinkDistanceM);
    return cfg.pu_power_w() * path_gain(d, cfg) * std::pow(10.0, -shadow.values_db.at(su) / 10.0);
}

void fill_received_samples(const Topology& topo, const PuState& pu, const ShadowField& shadow,
                           std::size_t su, int band, const ScenarioConfig& cfg, RngStream& rng,
                           std::span<std::complex<double>> out) {
    if (su >= topo.su_positions.size() || band < 0 || band >= cfg.n_bands) {
        throw std::out_of_range("received_samples: SU or band index out of range");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    const double noise_std = std::sqrt(cfg.noise_power_w() / 2.0);

    double amplitude = 0.0;
    if (pu.active) {
        switch (pu.role(band)) {
            case PuState::BandRole::kOccupied:
                amplitude = std::sqrt(mean_signal_power_w(topo, shadow, su, cfg));
                break;
            case PuState::BandRole::kAdjacent:
                amplitude = std::sqrt(cfg.leakage_linear() * mean_signal_power_w(topo, shadow, su, cfg));
                break;
            case PuState::BandRole::kVacant: break;
        }
    }

    if (amplitude == 0.0) {
        for (auto& y : out) {
            const double re = normal(rng);
            const double im = normal(rng);
            y = {noise_std * re, noise_std * im};
        }
        return;
    }

    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    constexpr double kHalfSqrt = std::numbers::sqrt2 / 2.0;
    auto draw_fading = [&] {
        const double re = normal(rng);
        const double im = normal(rng);
        return std::complex<double>(kHalfSqrt * re, kHalfSqrt * im);
    };
    std::complex<double> g = cfg.multipath_per_sample ? std::complex<double>{} : draw_fading();
    for (auto& y : out) {
        if (cfg.multipath_per_sample) g = draw_fading();
        const std::complex<double> x = std::polar(1.0, phase(rng));
        const double re = normal(rng);
        const double im = normal(rng);
        y = amplitude * g * x + std::complex<double>(noise_std * re, noise_std * im);
    }
}

std::vector<std::complex<double>> received_samples(const Topology& topo, const PuState& pu,
                                                   const ShadowField& shadow, std::size_t su,
                                                   int band, const ScenarioConfig& cfg,
                                                   RngStream& rng) {
    std::vector<std::complex<double>> out(static_cast<std::size_t>(cfg.n_ed));
    fill_received_samples(topo, pu, shadow, su, band, cfg, rng, out);
    return out;
}

}  // namespace coopsense
