#pragma once
// Conventional fusion rules fitted on the same training samples as the CNN:
// K-out-of-N voting over hard decisions and a linear soft-margin SVM.

#include <cstdint>
#include <optional>
#include <vector>

#include "coopsense/dataset.hpp"

namespace coopsense::baselines {

enum class KonStatistic {
    kMaxBandVotes,  // max over bands of the per-band count of 1s
    kTotalVotes,    // count of 1s over the whole matrix
};

struct KonRule {
    int k = 0;
    KonStatistic statistic = KonStatistic::kMaxBandVotes;
};

// Throws std::invalid_argument on soft input.
int kon_statistic(const SensingMatrix& hd, KonStatistic statistic = KonStatistic::kMaxBandVotes);

// Largest value the statistic can take for an n_su x n_bands matrix.
int kon_statistic_max(std::size_t n_su, std::size_t n_bands, KonStatistic statistic);

struct EmpiricalError {
    double p_fa = 0.0;
    double p_md = 0.0;
    double total() const { return p_fa + p_md; }
};

// P_FA and P_MD of "H1 iff statistic >= k" on a hard dataset with both labels.
EmpiricalError kon_error(const Dataset& hd, int k, KonStatistic statistic);

// Exhaustive scan over k; smallest k wins ties. Throws if the set lacks a label.
KonRule fit_kon(const Dataset& hd, KonStatistic statistic = KonStatistic::kMaxBandVotes);

Hypothesis predict_kon(const KonRule& rule, const SensingMatrix& hd);

struct LinearSvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    double lambda = 1e-3;
    SensingMode mode = SensingMode::kSoft;
    Standardizer standardizer;
};

struct SvmConfig {
    std::vector<double> lambda_grid{1e-4, 1e-3, 1e-2, 1e-1};
    int epochs = 200;
    double validation_fraction = 0.2;
    std::uint64_t seed = 1;
};

// Pegasos-style primal sub-gradient descent on
//   lambda/2 * (|w|^2 + b^2) + mean_i max(0, 1 - y_i (w.x_i + b))
// with step 1/(lambda t) and the bias as a constant feature. Returns the
// running average of the iterates. When `objective_trace` is non-null it
// receives the objective of the averaged iterate after each epoch.
struct SvmSolution {
    std::vector<double> weights;
    double bias = 0.0;
};
SvmSolution train_svm(const std::vector<std::vector<double>>& features, const std::vector<int>& labels_pm1,
                      double lambda, int epochs, std::uint64_t seed,
                      std::vector<double>* objective_trace = nullptr);

double svm_objective(const SvmSolution& s, const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels_pm1, double lambda);

// Picks lambda from the grid on a stratified validation split (lowest
// P_FA + P_MD, first in grid on ties), then refits on the whole set.
LinearSvmModel fit_linear_svm(const Dataset& train, const SvmConfig& cfg);

std::vector<double> svm_features(const LinearSvmModel& model, const SensingMatrix& m);
double svm_score(const LinearSvmModel& model, const SensingMatrix& m);
// H1 iff w.x + b >= 0.
Hypothesis predict_svm(const LinearSvmModel& model, const SensingMatrix& m);

nlohmann::ordered_json kon_to_json(const KonRule& rule);
KonRule kon_from_json(const nlohmann::json& j);
nlohmann::ordered_json svm_to_json(const LinearSvmModel& model);
LinearSvmModel svm_from_json(const nlohmann::json& j);

}  // namespace coopsense::baselines
