#include "coopsense/sensing.hpp"

#include <random>
#include <stdexcept>
#include <string>

#include "coopsense/simd/kernels.hpp"

namespace coopsense {

std::string_view mode_name(SensingMode mode) { return mode == SensingMode::kSoft ? "SD" : "HD"; }

SensingMode parse_mode(std::string_view text) {
    if (text == "sd" || text == "SD") return SensingMode::kSoft;
    if (text == "hd" || text == "HD") return SensingMode::kHard;
    throw std::invalid_argument("unknown sensing mode '" + std::string(text) + "' (expected sd|hd)");
}

double accumulate_energy(std::span<const std::complex<double>> samples) {
    if (samples.empty()) throw std::invalid_argument("accumulate_energy: no samples");
    return simd::sum_abs2(samples) / static_cast<double>(samples.size());
}

SensingMatrix sense_snapshot(const Topology& topo, const PuState& pu, const ShadowField& shadow,
                             const ScenarioConfig& cfg, RngStream& rng) {
    const auto n_su = topo.su_positions.size();
    const auto n_bands = static_cast<std::size_t>(cfg.n_bands);
    SensingMatrix m(SensingMode::kSoft, n_su, n_bands);
    std::vector<std::complex<double>> buffer(static_cast<std::size_t>(cfg.n_ed));
    for (std::size_t i = 0; i < n_su; ++i) {
        for (std::size_t j = 0; j < n_bands; ++j) {
            const bool noise_only = !pu.active || pu.role(static_cast<int>(j)) == PuState::BandRole::kVacant ||
                                    (pu.role(static_cast<int>(j)) == PuState::BandRole::kAdjacent &&
                                     cfg.leakage_linear() == 0.0);
            if (noise_only) {
                m.at(i, j) = noise_only_energy(cfg, rng);
                continue;
            }
            fill_received_samples(topo, pu, shadow, i, static_cast<int>(j), cfg, rng, buffer);
            m.at(i, j) = accumulate_energy(buffer);
        }
    }
    return m;
}

double noise_only_energy(const ScenarioConfig& cfg, RngStream& rng) {
    std::gamma_distribution<double> g(static_cast<double>(cfg.n_ed), 1.0);
    return cfg.noise_power_w() * g(rng) / static_cast<double>(cfg.n_ed);
}

SensingMatrix hard_decision(const SensingMatrix& soft, double gamma_dbm) {
    if (soft.mode != SensingMode::kSoft) {
        throw std::invalid_argument("hard_decision: input is already hard-decision");
    }
    const double gamma_w = dbm_to_watt(gamma_dbm);
    SensingMatrix hd(SensingMode::kHard, soft.n_su, soft.n_bands);
    for (std::size_t k = 0; k < soft.values.size(); ++k) {
        hd.values[k] = gamma_w <= soft.values[k] ? 1.0 : 0.0;
    }
    return hd;
}

}  // namespace coopsense
