#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopsense/rng.hpp"
#include "coopsense/sensing.hpp"

namespace coopsense {

enum class Hypothesis : int { kAbsent = 0, kPresent = 1 };  // H0 / H1

struct LabeledSample {
    SensingMatrix matrix;
    Hypothesis label = Hypothesis::kAbsent;
    std::uint64_t snapshot_index = 0;

    bool operator==(const LabeledSample&) const = default;
};

struct Dataset {
    ScenarioConfig scenario;
    SensingMode mode = SensingMode::kSoft;
    std::vector<LabeledSample> samples;

    std::size_t n_su() const { return static_cast<std::size_t>(scenario.n_su); }
    std::size_t n_bands() const { return static_cast<std::size_t>(scenario.n_bands); }
    std::size_t size() const { return samples.size(); }
    std::size_t count(Hypothesis h) const;
};

// Snapshots [first_snapshot, first_snapshot + count) of the mobile trajectory
// seeded by `seed`. Snapshot s uses the topology after s + 1 mobility steps
// and its own derived stream, so a later segment continues the same
// trajectory without sharing any stream with an earlier one.
Dataset generate_segment(const ScenarioConfig& cfg, SensingMode mode, std::uint64_t seed,
                         std::uint64_t first_snapshot, std::size_t count);

inline Dataset generate_dataset(const ScenarioConfig& cfg, std::size_t n_samples, SensingMode mode,
                                std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("generate_dataset: n_samples must be >= 1");
    return generate_segment(cfg, mode, seed, 0, n_samples);
}

// Soft dataset -> hard dataset with the scenario's effective threshold.
Dataset to_hard_decision(const Dataset& soft);
Dataset to_hard_decision(const Dataset& soft, double gamma_dbm);

// Label-stratified split; each class contributes round(fraction * n_class)
// samples (at least one when it has two or more) to the second set.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double val_fraction, RngStream& rng);

// Global dB-domain z-scoring for soft reports; identity for hard reports.
struct Standardizer {
    enum class Domain { kDbScale, kIdentity };
    Domain domain = Domain::kIdentity;
    double mean = 0.0;
    double std = 1.0;

    bool operator==(const Standardizer&) const = default;
};

// Throws std::invalid_argument for an empty set or zero variance.
Standardizer fit_standardizer(const Dataset& train);
std::vector<double> apply_standardizer(const Standardizer& s, const SensingMatrix& m);

nlohmann::ordered_json standardizer_to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

class DatasetParseError : public std::runtime_error {
public:
    DatasetParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

inline constexpr int kDatasetFormatVersion = 1;

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace coopsense
