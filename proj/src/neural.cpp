#include "coopsense/neural.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "coopsense/simd/kernels.hpp"

namespace coopsense::nn {
namespace {

#ifdef NDEBUG
inline void debug_check(std::span<const double>, const char*) {}
#else
inline void debug_check(std::span<const double> v, const char* where) { check_finite(v, where); }
#endif

void fill_normal(std::vector<double>& v, double stddev, RngStream& rng) {
    std::normal_distribution<double> normal(0.0, stddev);
    for (auto& x : v) x = normal(rng);
}

// Valid kernel columns [kx0, kx1] for output column j.
inline void column_taps(std::size_t j, std::size_t width, std::size_t& kx0, std::size_t& kx1) {
    kx0 = j == 0 ? 1 : 0;
    kx1 = j + 1 == width ? 1 : 2;
}

}  // namespace

void check_finite(std::span<const double> values, const char* where) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw std::runtime_error(std::string("non-finite value in ") + where + " at index " +
                                     std::to_string(i));
        }
    }
}

void init_conv(ConvParams& p, RngStream& rng) {
    fill_normal(p.weights, std::sqrt(2.0 / static_cast<double>(9 * p.in_ch)), rng);
    std::fill(p.bias.begin(), p.bias.end(), 0.0);
}

void init_fc(FcParams& p, RngStream& rng) {
    fill_normal(p.weights, std::sqrt(2.0 / static_cast<double>(p.in)), rng);
    std::fill(p.bias.begin(), p.bias.end(), 0.0);
}

void init_softmax(SoftmaxParams& p, RngStream& rng) {
    fill_normal(p.weights, std::sqrt(2.0 / static_cast<double>(p.in)), rng);
}

Tensor conv3x3_forward(const Tensor& x, const ConvParams& p) {
    if (x.c != p.in_ch) {
        throw std::invalid_argument("conv3x3_forward: input has " + std::to_string(x.c) +
                                    " channels, layer expects " + std::to_string(p.in_ch));
    }
    const auto& k = simd::active();
    const std::size_t ci = p.in_ch;
    const std::size_t co = p.out_ch;
    Tensor out(x.h, x.w, co);
    for (std::size_t i = 0; i < x.h; ++i) {
        for (std::size_t j = 0; j < x.w; ++j) {
            double* y = &out.data[out.index(i, j, 0)];
            std::copy(p.bias.begin(), p.bias.end(), y);
            std::size_t kx0, kx1;
            column_taps(j, x.w, kx0, kx1);
            for (std::size_t ky = 0; ky < 3; ++ky) {
                if ((i == 0 && ky == 0) || (i + 1 == x.h && ky == 2)) continue;
                const std::size_t ii = i + ky - 1;
                const double* xb = &x.data[x.index(ii, j + kx0 - 1, 0)];
                const double* wb = &p.weights[(ky * 3 + kx0) * ci * co];
                k.gemv_t_acc(xb, wb, y, (kx1 - kx0 + 1) * ci, co);
            }
        }
    }
    debug_check(out.data, "conv3x3_forward");
    return out;
}

Tensor conv3x3_backward_acc(const Tensor& x, const ConvParams& p, const Tensor& grad_out,
                            ConvParams& grad_p, bool need_grad_x) {
    if (x.c != p.in_ch || grad_out.h != x.h || grad_out.w != x.w || grad_out.c != p.out_ch ||
        grad_p.in_ch != p.in_ch || grad_p.out_ch != p.out_ch) {
        throw std::invalid_argument("conv3x3_backward: shape mismatch");
    }
    const auto& k = simd::active();
    const std::size_t ci = p.in_ch;
    const std::size_t co = p.out_ch;
    Tensor gx = need_grad_x ? Tensor(x.h, x.w, ci) : Tensor();
    for (std::size_t i = 0; i < x.h; ++i) {
        for (std::size_t j = 0; j < x.w; ++j) {
            const double* g = &grad_out.data[grad_out.index(i, j, 0)];
            k.axpy(1.0, g, grad_p.bias.data(), co);
            std::size_t kx0, kx1;
            column_taps(j, x.w, kx0, kx1);
            for (std::size_t ky = 0; ky < 3; ++ky) {
                if ((i == 0 && ky == 0) || (i + 1 == x.h && ky == 2)) continue;
                const std::size_t ii = i + ky - 1;
                const std::size_t xo = x.index(ii, j + kx0 - 1, 0);
                const std::size_t wo = (ky * 3 + kx0) * ci * co;
                const std::size_t taps = (kx1 - kx0 + 1) * ci;
                if (need_grad_x) k.gemv_acc(&p.weights[wo], g, &gx.data[xo], taps, co);
                k.ger_acc(&x.data[xo], g, &grad_p.weights[wo], taps, co);
            }
        }
    }
    return gx;
}

ConvGrads conv3x3_backward(const Tensor& x, const ConvParams& p, const Tensor& grad_out) {
    ConvGrads r;
    r.grad_p = ConvParams(p.in_ch, p.out_ch);
    r.grad_x = conv3x3_backward_acc(x, p, grad_out, r.grad_p, true);
    return r;
}

Tensor relu_forward(const Tensor& x) {
    Tensor out(x.h, x.w, x.c);
    simd::active().relu(x.data.data(), out.data.data(), x.data.size());
    return out;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
    if (!x.same_shape(grad_out)) throw std::invalid_argument("relu_backward: shape mismatch");
    Tensor gx(x.h, x.w, x.c);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        gx.data[i] = x.data[i] > 0.0 ? grad_out.data[i] : 0.0;
    }
    return gx;
}

PoolResult maxpool2x2_forward(const Tensor& x) {
    const std::size_t oh = (x.h + 1) / 2;
    const std::size_t ow = (x.w + 1) / 2;
    PoolResult r{Tensor(oh, ow, x.c), std::vector<std::int64_t>(oh * ow * x.c, -1)};
    for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
            for (std::size_t c = 0; c < x.c; ++c) {
                double best = 0.0;
                std::int64_t best_idx = -2;
                for (std::size_t di = 0; di < 2; ++di) {
                    for (std::size_t dj = 0; dj < 2; ++dj) {
                        const std::size_t ii = 2 * i + di;
                        const std::size_t jj = 2 * j + dj;
                        const bool pad = ii >= x.h || jj >= x.w;
                        const double v = pad ? 0.0 : x.at(ii, jj, c);
                        if (best_idx == -2 || v > best) {
                            best = v;
                            best_idx = pad ? -1 : static_cast<std::int64_t>(x.index(ii, jj, c));
                        }
                    }
                }
                const std::size_t o = r.out.index(i, j, c);
                r.out.data[o] = best;
                r.argmax[o] = best_idx;
            }
        }
    }
    return r;
}

Tensor maxpool2x2_backward(const std::vector<std::int64_t>& argmax, std::size_t in_h,
                           std::size_t in_w, std::size_t in_c, const Tensor& grad_out) {
    if (argmax.size() != grad_out.data.size() || grad_out.h != (in_h + 1) / 2 ||
        grad_out.w != (in_w + 1) / 2 || grad_out.c != in_c) {
        throw std::invalid_argument("maxpool2x2_backward: shape mismatch");
    }
    Tensor gx(in_h, in_w, in_c);
    for (std::size_t o = 0; o < argmax.size(); ++o) {
        if (argmax[o] >= 0) gx.data[static_cast<std::size_t>(argmax[o])] += grad_out.data[o];
    }
    return gx;
}

std::vector<double> fc_forward(std::span<const double> x, const FcParams& p) {
    if (x.size() != p.in) {
        throw std::invalid_argument("fc_forward: input length " + std::to_string(x.size()) +
                                    ", layer expects " + std::to_string(p.in));
    }
    const auto& k = simd::active();
    std::vector<double> y(p.out);
    for (std::size_t o = 0; o < p.out; ++o) {
        y[o] = p.bias[o] + k.dot(&p.weights[o * p.in], x.data(), p.in);
    }
    debug_check(y, "fc_forward");
    return y;
}

std::vector<double> fc_backward_acc(std::span<const double> x, const FcParams& p,
                                    std::span<const double> grad_out, FcParams& grad_p) {
    if (x.size() != p.in || grad_out.size() != p.out || grad_p.in != p.in || grad_p.out != p.out) {
        throw std::invalid_argument("fc_backward: length mismatch");
    }
    const auto& k = simd::active();
    std::vector<double> gx(p.in, 0.0);
    k.gemv_t_acc(grad_out.data(), p.weights.data(), gx.data(), p.out, p.in);
    k.ger_acc(grad_out.data(), x.data(), grad_p.weights.data(), p.out, p.in);
    k.axpy(1.0, grad_out.data(), grad_p.bias.data(), p.out);
    return gx;
}

FcGrads fc_backward(std::span<const double> x, const FcParams& p, std::span<const double> grad_out) {
    FcGrads r;
    r.grad_p = FcParams(p.in, p.out);
    r.grad_x = fc_backward_acc(x, p, grad_out, r.grad_p);
    return r;
}

std::array<double, 2> softmax_logits(std::span<const double> x, const SoftmaxParams& p) {
    if (x.size() != p.in) throw std::invalid_argument("softmax: input length mismatch");
    const auto& k = simd::active();
    return {k.dot(p.weights.data(), x.data(), p.in), k.dot(p.weights.data() + p.in, x.data(), p.in)};
}

std::array<double, 2> softmax_probs(std::array<double, 2> z) {
    const double m = std::max(z[0], z[1]);
    const double e0 = std::exp(z[0] - m);
    const double e1 = std::exp(z[1] - m);
    const double s = e0 + e1;
    return {e0 / s, e1 / s};
}

std::vector<double> softmax_backward_acc(std::span<const double> x, const SoftmaxParams& p,
                                         std::array<double, 2> grad_logits, SoftmaxParams& grad_p) {
    if (x.size() != p.in || grad_p.in != p.in) {
        throw std::invalid_argument("softmax_backward: length mismatch");
    }
    const auto& k = simd::active();
    std::vector<double> gx(p.in, 0.0);
    k.gemv_t_acc(grad_logits.data(), p.weights.data(), gx.data(), 2, p.in);
    k.ger_acc(grad_logits.data(), x.data(), grad_p.weights.data(), 2, p.in);
    return gx;
}

double cross_entropy(std::array<double, 2> probs, int label) {
    return -std::log(std::max(probs[label == 0 ? 0 : 1], kProbabilityFloor));
}

std::array<double, 2> cross_entropy_grad(std::array<double, 2> probs, int label) {
    return {probs[0] - (label == 0 ? 1.0 : 0.0), probs[1] - (label == 0 ? 0.0 : 1.0)};
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& s) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("adam_step: parameter/gradient size mismatch");
    }
    if (s.m.empty() && s.v.empty()) {
        s.m.assign(params.size(), 0.0);
        s.v.assign(params.size(), 0.0);
    }
    if (s.m.size() != params.size() || s.v.size() != params.size()) {
        throw std::invalid_argument("adam_step: optimizer state does not match parameters");
    }
    ++s.t;
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g;
        s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g * g;
        const double m_hat = s.m[i] / c1;
        const double v_hat = s.v[i] / c2;
        params[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
    }
}

}  // namespace coopsense::nn
