#pragma once
// Data-parallel inner loops used by the channel simulator, the CNN and the
// SVM baseline. Every kernel has a portable scalar reference and an AVX2
// variant; the variant is picked once at startup from CPUID and can be
// overridden with COOPSENSE_ISA=scalar|avx2.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace coopsense::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

struct KernelTable {
    Isa isa;
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]; per-element rounding identical across variants
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // sum_i |z[i]|^2
    double (*sum_abs2)(const std::complex<double>* z, std::size_t n);
    // y[i] = max(x[i], 0)
    void (*relu)(const double* x, double* y, std::size_t n);
    // y[o] += sum_k x[k] * w[k*n + o], k ascending; w is k x n row-major.
    // Same per-element rounding sequence in every variant.
    void (*gemv_t_acc)(const double* x, const double* w, double* y, std::size_t k, std::size_t n);
    // y[r] += sum_o w[r*n + o] * g[o]; w is k x n row-major.
    void (*gemv_acc)(const double* w, const double* g, double* y, std::size_t k, std::size_t n);
    // a[r*n + o] += x[r] * g[o]; exact per element.
    void (*ger_acc)(const double* x, const double* g, double* a, std::size_t k, std::size_t n);
};

const KernelTable& scalar_kernels();
// Returns nullptr when the variant was not compiled in.
const KernelTable* avx2_kernels();

bool isa_supported(Isa isa);

// Table used by the library. Thread-safe to read; set_active_isa is meant for
// tests and benchmarks and must not race with kernel use.
const KernelTable& active();
Isa active_isa();
void set_active_isa(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

inline double sum_abs2(std::span<const std::complex<double>> z) {
    return active().sum_abs2(z.data(), z.size());
}

}  // namespace coopsense::simd
