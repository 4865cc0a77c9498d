#pragma once
// Deep cooperative sensing: a small CNN that fuses the SU x band sensing
// matrix into a PU presence decision.
//
// Network: [conv3x3 -> ReLU -> maxpool2x2] x N_C -> flatten -> FC(F1) -> ReLU
//          -> FC(F2) -> softmax(2)
//
// Inputs are standardized (soft reports) and row-permuted with the model's
// SU permutation before the first layer; training and inference share the
// same preparation path.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "coopsense/dataset.hpp"
#include "coopsense/neural.hpp"

namespace coopsense::dcs {

struct ArchConfig {
    int n_conv_blocks = 3;
    std::vector<int> conv_depths{8, 8, 8};
    std::array<int, 2> fc_widths{8, 8};

    void validate() const;
    bool operator==(const ArchConfig&) const = default;
};

struct Weights {
    std::vector<nn::ConvParams> convs;
    nn::FcParams fc1;
    nn::FcParams fc2;
    nn::SoftmaxParams softmax;

    std::size_t count() const;
    // Declared order: conv blocks (weights, bias), fc1 (weights, bias),
    // fc2 (weights, bias), softmax weights.
    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);
    Weights zeros_like() const;
};

struct CnnModel {
    ArchConfig arch;
    std::size_t n_su = 0;
    std::size_t n_bands = 0;
    SensingMode mode = SensingMode::kSoft;
    Weights weights;
    std::vector<std::size_t> su_permutation;  // input row r = raw row su_permutation[r]
    Standardizer standardizer;
};

// Throws std::invalid_argument if the input is smaller than 2x2 or a conv
// block would receive a spatial dimension below 2.
CnnModel build_model(const ArchConfig& arch, std::size_t n_su, std::size_t n_bands, RngStream& rng);

// Spatial (h, w) entering each conv block, plus the pooled output of the last.
std::vector<std::array<std::size_t, 2>> spatial_chain(const ArchConfig& arch, std::size_t n_su,
                                                      std::size_t n_bands);

std::size_t count_parameters(const CnnModel& model);

std::uint64_t permutation_hash(const std::vector<std::size_t>& perm);
bool is_permutation(const std::vector<std::size_t>& perm, std::size_t n);

// Standardize + permute a raw sensing matrix. Throws on mode/dimension mismatch.
std::vector<double> prepare_input(const CnnModel& model, const SensingMatrix& raw);

struct ForwardResult {
    std::array<double, 2> logits{};
    std::array<double, 2> probs{};
    Hypothesis decision = Hypothesis::kPresent;
};

// H0 iff P(H0) > P(H1); a tie declares the PU present.
Hypothesis decide(std::array<double, 2> probs);

// `input` is an already prepared (standardized, permuted) n_su x n_bands matrix.
ForwardResult forward(const CnnModel& model, std::span<const double> input);

// Loss for one sample; adds d loss / d weights into `grads`.
double accumulate_gradients(const CnnModel& model, std::span<const double> input, int label,
                            Weights& grads, ForwardResult* result = nullptr);

Hypothesis predict(const CnnModel& model, const SensingMatrix& raw);
std::vector<Hypothesis> predict_batch(const CnnModel& model, const std::vector<SensingMatrix>& raw);

struct TrainConfig {
    int epochs = 300;
    int batch_size = 32;
    double lr = 1e-3;
    int n_permutations = 9;  // candidates including the identity
    double validation_fraction = 0.2;
    int patience = 30;
    std::uint64_t seed = 1;

    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainResult {
    CnnModel model;
    std::vector<EpochStats> history;
    double best_val_accuracy = 0.0;
    int best_epoch = 0;
};

// Mini-batch Adam on cross-entropy. Keeps the weights with the best
// validation accuracy (lower validation loss breaks ties) and stops after
// `patience` epochs without an accuracy gain. Throws std::runtime_error on a
// non-finite loss.
TrainResult train(const CnnModel& model, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& tc);

struct Candidate {
    std::vector<std::size_t> permutation;
    TrainResult result;
};

struct EnsembleResult {
    CnnModel model;
    std::vector<EpochStats> history;
    std::size_t best_index = 0;
    std::vector<Candidate> candidates;
};

// Trains one CNN per SU permutation (first is the identity) on a shared
// train/validation split and returns the most accurate on validation; ties
// go to the lowest index.
EnsembleResult train_permutation_ensemble(const Dataset& train_set, const TrainConfig& tc,
                                          const ArchConfig& arch);

nlohmann::ordered_json model_to_json(const CnnModel& model);
CnnModel model_from_json(const nlohmann::json& j);

nlohmann::ordered_json arch_to_json(const ArchConfig& arch);
ArchConfig arch_from_json(const nlohmann::json& j);
nlohmann::ordered_json train_config_to_json(const TrainConfig& tc);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace coopsense::dcs
