#include "coopsense/simd/kernels.hpp"

namespace coopsense::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_abs2_scalar(const std::complex<double>* z, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double re = z[i].real();
        const double im = z[i].imag();
        acc += re * re + im * im;
    }
    return acc;
}

void relu_scalar(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void gemv_t_acc_scalar(const double* x, const double* w, double* y, std::size_t k, std::size_t n) {
    for (std::size_t r = 0; r < k; ++r) {
        const double xr = x[r];
        const double* row = w + r * n;
        for (std::size_t o = 0; o < n; ++o) y[o] += xr * row[o];
    }
}

void gemv_acc_scalar(const double* w, const double* g, double* y, std::size_t k, std::size_t n) {
    for (std::size_t r = 0; r < k; ++r) y[r] += dot_scalar(w + r * n, g, n);
}

void ger_acc_scalar(const double* x, const double* g, double* a, std::size_t k, std::size_t n) {
    for (std::size_t r = 0; r < k; ++r) axpy_scalar(x[r], g, a + r * n, n);
}

constexpr KernelTable kScalarTable{Isa::kScalar,     dot_scalar,        axpy_scalar,
                                   sum_abs2_scalar,  relu_scalar,       gemv_t_acc_scalar,
                                   gemv_acc_scalar,  ger_acc_scalar};

}  // namespace

const KernelTable& scalar_kernels() { return kScalarTable; }

}  // namespace coopsense::simd
