#pragma once
// Dense layers for the fusion CNN with hand-written backward passes:
// 3x3 same-padded convolution, ReLU, 2x2 max pooling, fully connected,
// bias-free two-class softmax, cross-entropy, and the Adam optimizer.
// Tensors are height x width x channels, channels fastest.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "coopsense/rng.hpp"

namespace coopsense::nn {

struct Tensor {
    std::size_t h = 0;
    std::size_t w = 0;
    std::size_t c = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0)
        : h(height), w(width), c(channels), data(height * width * channels, fill) {}

    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return (i * w + j) * c + k; }
    double& at(std::size_t i, std::size_t j, std::size_t k) { return data[index(i, j, k)]; }
    double at(std::size_t i, std::size_t j, std::size_t k) const { return data[index(i, j, k)]; }
    bool same_shape(const Tensor& o) const { return h == o.h && w == o.w && c == o.c; }
};

// Throws std::runtime_error naming `where` if any value is NaN or infinite.
// Layers call it automatically in builds without NDEBUG.
void check_finite(std::span<const double> values, const char* where);

struct ConvParams {
    std::size_t in_ch = 0;
    std::size_t out_ch = 0;
    std::vector<double> weights;  // [ky][kx][in][out]
    std::vector<double> bias;     // [out]

    ConvParams() = default;
    ConvParams(std::size_t in, std::size_t out)
        : in_ch(in), out_ch(out), weights(9 * in * out, 0.0), bias(out, 0.0) {}

    double& w(std::size_t ky, std::size_t kx, std::size_t ci, std::size_t co) {
        return weights[((ky * 3 + kx) * in_ch + ci) * out_ch + co];
    }
    double w(std::size_t ky, std::size_t kx, std::size_t ci, std::size_t co) const {
        return weights[((ky * 3 + kx) * in_ch + ci) * out_ch + co];
    }
    std::size_t size() const { return weights.size() + bias.size(); }
};

struct FcParams {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;  // out x in, row-major
    std::vector<double> bias;

    FcParams() = default;
    FcParams(std::size_t n_in, std::size_t n_out)
        : in(n_in), out(n_out), weights(n_in * n_out, 0.0), bias(n_out, 0.0) {}
    std::size_t size() const { return weights.size() + bias.size(); }
};

// Two output classes, no bias.
struct SoftmaxParams {
    std::size_t in = 0;
    std::vector<double> weights;  // 2 x in, row-major

    SoftmaxParams() = default;
    explicit SoftmaxParams(std::size_t n_in) : in(n_in), weights(2 * n_in, 0.0) {}
    std::size_t size() const { return weights.size(); }
};

// He-style init: weights ~ N(0, 2/fan_in), biases zero.
void init_conv(ConvParams& p, RngStream& rng);
void init_fc(FcParams& p, RngStream& rng);
void init_softmax(SoftmaxParams& p, RngStream& rng);

Tensor conv3x3_forward(const Tensor& x, const ConvParams& p);

struct ConvGrads {
    Tensor grad_x;
    ConvParams grad_p;
};
ConvGrads conv3x3_backward(const Tensor& x, const ConvParams& p, const Tensor& grad_out);
// Accumulating form used by training: adds parameter gradients into `grad_p`.
Tensor conv3x3_backward_acc(const Tensor& x, const ConvParams& p, const Tensor& grad_out,
                            ConvParams& grad_p, bool need_grad_x = true);

Tensor relu_forward(const Tensor& x);
// Passes grad where x > 0 (subgradient 0 at x == 0).
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

struct PoolResult {
    Tensor out;
    // Flat input index of each output's max, or -1 for a zero pad cell.
    std::vector<std::int64_t> argmax;
};
// 2x2 window, stride 2. Odd sizes are zero-padded on the high side.
// Ties go to the lowest input index.
PoolResult maxpool2x2_forward(const Tensor& x);
Tensor maxpool2x2_backward(const std::vector<std::int64_t>& argmax, std::size_t in_h,
                           std::size_t in_w, std::size_t in_c, const Tensor& grad_out);

std::vector<double> fc_forward(std::span<const double> x, const FcParams& p);
struct FcGrads {
    std::vector<double> grad_x;
    FcParams grad_p;
};
FcGrads fc_backward(std::span<const double> x, const FcParams& p, std::span<const double> grad_out);
std::vector<double> fc_backward_acc(std::span<const double> x, const FcParams& p,
                                    std::span<const double> grad_out, FcParams& grad_p);

std::array<double, 2> softmax_logits(std::span<const double> x, const SoftmaxParams& p);
std::array<double, 2> softmax_probs(std::array<double, 2> logits);
inline std::array<double, 2> softmax2(std::span<const double> x, const SoftmaxParams& p) {
    return softmax_probs(softmax_logits(x, p));
}
std::vector<double> softmax_backward_acc(std::span<const double> x, const SoftmaxParams& p,
                                         std::array<double, 2> grad_logits, SoftmaxParams& grad_p);

inline constexpr double kProbabilityFloor = 1e-12;

// -log(max(probs[label], 1e-12)).
double cross_entropy(std::array<double, 2> probs, int label);
// d loss / d logits = probs - onehot(label).
std::array<double, 2> cross_entropy_grad(std::array<double, 2> probs, int label);

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t t = 0;
    std::vector<double> m;
    std::vector<double> v;
};

// One bias-corrected Adam update. Moments are sized on first use; a later
// size mismatch throws std::invalid_argument.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace coopsense::nn
