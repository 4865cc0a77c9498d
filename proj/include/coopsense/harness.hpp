#pragma once
// Evaluation metrics, fitted-method bundles, parameter sweeps, latency
// benchmarks and the checkpoint container shared by the CLI.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "coopsense/baselines.hpp"
#include "coopsense/dcs.hpp"

namespace coopsense::harness {

struct Metrics {
    double p_fa = 0.0;
    double p_md = 0.0;
    double sensing_error = 0.0;
    std::size_t n_h0 = 0;
    std::size_t n_h1 = 0;
    bool p_fa_valid = false;
    bool p_md_valid = false;

    bool valid() const { return p_fa_valid && p_md_valid; }
};

// Components with a zero denominator are flagged invalid and left at 0;
// sensing_error is only meaningful when both are valid.
Metrics metrics_from_decisions(const std::vector<Hypothesis>& decisions,
                               const std::vector<Hypothesis>& labels);

using Predictor = std::function<Hypothesis(const SensingMatrix&)>;
Metrics evaluate(const Predictor& predictor, const Dataset& eval_set);

enum class Method { kDcsSoft, kDcsHard, kKon, kSvmSoft, kSvmHard };

inline constexpr Method kAllMethods[] = {Method::kDcsSoft, Method::kDcsHard, Method::kKon,
                                         Method::kSvmSoft, Method::kSvmHard};

std::string_view method_name(Method m);  // "DCS-SD", "DCS-HD", "KON", "SVM-SD", "SVM-HD"
Method parse_method(std::string_view name);
// Input representation the method consumes.
SensingMode method_mode(Method m);

struct ExperimentConfig {
    ScenarioConfig scenario;
    dcs::ArchConfig arch;
    dcs::TrainConfig train;
    baselines::SvmConfig svm;
    baselines::KonStatistic kon_statistic = baselines::KonStatistic::kMaxBandVotes;
    std::size_t n_train = 200;
    std::size_t n_eval = 2000;
};

struct FittedMethods {
    double gamma_dbm = 0.0;  // threshold used to derive hard reports from soft ones
    std::optional<dcs::CnnModel> dcs_soft;
    std::optional<dcs::CnnModel> dcs_hard;
    std::optional<baselines::KonRule> kon;
    std::optional<baselines::LinearSvmModel> svm_soft;
    std::optional<baselines::LinearSvmModel> svm_hard;
    // Identity-permutation member of the DCS-SD ensemble, kept for comparison.
    std::optional<dcs::CnnModel> dcs_soft_identity;

    bool has(Method m) const;
    std::vector<Method> methods() const;
    // Accepts soft or hard input; soft input is hard-decided when the method
    // needs it. Throws if the method is not fitted or the input cannot be
    // converted (hard input to a soft-input method).
    Hypothesis predict(Method m, const SensingMatrix& input) const;
};

// Fits the requested methods on a training set. Soft-input methods need a
// soft training set.
FittedMethods fit_methods(const Dataset& train_set, const std::vector<Method>& methods,
                          const ExperimentConfig& cfg);

struct ExperimentOutcome {
    std::map<Method, Metrics> metrics;
    std::optional<Metrics> dcs_soft_identity;
};

// Train on snapshots [0, n_train) and evaluate on [n_train, n_train + n_eval)
// of the trajectory seeded by `seed`. DCS, SVM and the split share `seed`.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::vector<Method>& methods,
                                 std::uint64_t seed);

struct SweepSpec {
    std::string param;  // a scenario key, or n_train / n_eval
    std::vector<double> values;
    ExperimentConfig base;
    std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
    int repetitions = 5;
    std::uint64_t seed = 1;
    int threads = 1;

    void validate() const;
};

ExperimentConfig apply_sweep_value(const ExperimentConfig& base, const std::string& param, double value);

struct SweepRow {
    double param = 0.0;
    Method method = Method::kDcsSoft;
    double p_fa = 0.0;
    double p_md = 0.0;
    double sensing_error = 0.0;
    bool p_fa_valid = false;
    bool p_md_valid = false;
    int reps = 0;  // repetitions that contributed; 0 marks a failed point
    std::string error;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // ordered by sweep value, then method
    // DCS-SD identity-permutation candidate error per (value index, rep).
    std::vector<std::vector<std::optional<double>>> identity_error;
    std::vector<std::vector<std::optional<double>>> ensemble_error;
};

// Repetition r of every sweep value uses seed derive_seed(spec.seed, kRepetition, r),
// so sweep values share their random trajectories.
SweepResult run_sweep(const SweepSpec& spec);

std::string format_param(double v);
void write_sweep_csv(const SweepResult& result, std::ostream& out);
void write_plot_script(const SweepSpec& spec, const std::string& csv_path, std::ostream& out);

struct LatencyRow {
    Method method = Method::kDcsSoft;
    std::size_t n_su = 0;
    double mean_ms = 0.0;
    double median_ms = 0.0;
    double p95_ms = 0.0;
};

struct LatencyReport {
    std::vector<LatencyRow> rows;
};

// Times single-sample decisions on one thread. The first `warmup` calls are
// discarded; `iters` calls are timed, cycling through the evaluation set.
LatencyReport bench_latency(const FittedMethods& models, const Dataset& eval_set, int warmup,
                            int iters);
void write_latency_csv(const LatencyReport& report, std::ostream& out);

// Checkpoint container: one JSON document with a payload per fitted model.
inline constexpr int kCheckpointVersion = 1;
void save_checkpoint(const FittedMethods& models, const ScenarioConfig& scenario,
                     const std::filesystem::path& path);
struct LoadedCheckpoint {
    FittedMethods models;
    ScenarioConfig scenario;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

// Top-level config file: {"scenario", "arch", "train", "svm", "experiment", "sweep", "bench"}.
struct BenchSpec {
    std::vector<int> n_su_values;
    int warmup = 50;
    int iters = 500;
};

struct ConfigFile {
    ExperimentConfig experiment;
    std::optional<SweepSpec> sweep;
    BenchSpec bench;
};
ConfigFile parse_config(const nlohmann::json& j);
ConfigFile load_config(const std::filesystem::path& path);

}  // namespace coopsense::harness
