#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "coopsense/channel.hpp"

namespace coopsense {

enum class SensingMode { kSoft, kHard };

std::string_view mode_name(SensingMode mode);  // "SD" / "HD"
SensingMode parse_mode(std::string_view text);  // accepts sd/SD/hd/HD

// n_su x n_bands reports, row-major (row = SU). Soft entries are linear
// watts, hard entries are 0.0 or 1.0.
struct SensingMatrix {
    SensingMode mode = SensingMode::kSoft;
    std::size_t n_su = 0;
    std::size_t n_bands = 0;
    std::vector<double> values;

    SensingMatrix() = default;
    SensingMatrix(SensingMode m, std::size_t rows, std::size_t cols)
        : mode(m), n_su(rows), n_bands(cols), values(rows * cols, 0.0) {}

    double& at(std::size_t su, std::size_t band) { return values[su * n_bands + band]; }
    double at(std::size_t su, std::size_t band) const { return values[su * n_bands + band]; }

    bool operator==(const SensingMatrix&) const = default;
};

// Mean of |y|^2. Throws std::invalid_argument on empty input.
double accumulate_energy(std::span<const std::complex<double>> samples);

// Energy of N_ED noise-only samples drawn in one step: noise power times
// Gamma(N_ED, 1) / N_ED, the exact law of the mean of N_ED |w|^2 terms.
double noise_only_energy(const ScenarioConfig& cfg, RngStream& rng);

// Cells without PU signal use noise_only_energy; the rest accumulate
// fill_received_samples output.
SensingMatrix sense_snapshot(const Topology& topo, const PuState& pu, const ShadowField& shadow,
                             const ScenarioConfig& cfg, RngStream& rng);

// 1 where gamma <= T (compared in watts). Throws on hard input.
SensingMatrix hard_decision(const SensingMatrix& soft, double gamma_dbm);

}  // namespace coopsense
