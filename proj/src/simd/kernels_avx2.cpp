// Compiled with -mavx2 -ffp-contract=off. Only reached after CPUID says AVX2
// is present. No FMA: axpy must round exactly like the scalar loop.

#include <immintrin.h>

#include "coopsense/simd/kernels.hpp"

namespace coopsense::simd {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        acc1 = _mm256_add_pd(acc1,
                             _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_abs2_avx2(const std::complex<double>* z, std::size_t n) {
    // std::complex<double> is layout-compatible with double[2].
    const double* p = reinterpret_cast<const double*>(z);
    const std::size_t len = 2 * n;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= len; i += 8) {
        const __m256d v0 = _mm256_loadu_pd(p + i);
        const __m256d v1 = _mm256_loadu_pd(p + i + 4);
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(v0, v0));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(v1, v1));
    }
    for (; i + 4 <= len; i += 4) {
        const __m256d v0 = _mm256_loadu_pd(p + i);
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(v0, v0));
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < len; ++i) acc += p[i] * p[i];
    return acc;
}

void relu_avx2(const double* x, double* y, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // max_pd returns the second operand for NaN and for -0.0 == 0.0,
        // matching the scalar comparison.
        _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void gemv_t_acc_avx2(const double* x, const double* w, double* y, std::size_t k, std::size_t n) {
    std::size_t o = 0;
    // Columns in blocks of 8 held in registers across all rows.
    for (; o + 8 <= n; o += 8) {
        __m256d y0 = _mm256_loadu_pd(y + o);
        __m256d y1 = _mm256_loadu_pd(y + o + 4);
        for (std::size_t r = 0; r < k; ++r) {
            const __m256d xr = _mm256_set1_pd(x[r]);
            const double* row = w + r * n + o;
            y0 = _mm256_add_pd(y0, _mm256_mul_pd(xr, _mm256_loadu_pd(row)));
            y1 = _mm256_add_pd(y1, _mm256_mul_pd(xr, _mm256_loadu_pd(row + 4)));
        }
        _mm256_storeu_pd(y + o, y0);
        _mm256_storeu_pd(y + o + 4, y1);
    }
    for (; o + 4 <= n; o += 4) {
        __m256d y0 = _mm256_loadu_pd(y + o);
        for (std::size_t r = 0; r < k; ++r) {
            y0 = _mm256_add_pd(y0, _mm256_mul_pd(_mm256_set1_pd(x[r]), _mm256_loadu_pd(w + r * n + o)));
        }
        _mm256_storeu_pd(y + o, y0);
    }
    for (; o < n; ++o) {
        double acc = y[o];
        for (std::size_t r = 0; r < k; ++r) acc += x[r] * w[r * n + o];
        y[o] = acc;
    }
}

void gemv_acc_avx2(const double* w, const double* g, double* y, std::size_t k, std::size_t n) {
    if (n == 8) {
        const __m256d g0 = _mm256_loadu_pd(g);
        const __m256d g1 = _mm256_loadu_pd(g + 4);
        for (std::size_t r = 0; r < k; ++r) {
            const double* row = w + r * 8;
            const __m256d p = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(row), g0),
                                            _mm256_mul_pd(_mm256_loadu_pd(row + 4), g1));
            y[r] += hsum(p);
        }
        return;
    }
    for (std::size_t r = 0; r < k; ++r) y[r] += dot_avx2(w + r * n, g, n);
}

void ger_acc_avx2(const double* x, const double* g, double* a, std::size_t k, std::size_t n) {
    for (std::size_t r = 0; r < k; ++r) axpy_avx2(x[r], g, a + r * n, n);
}

constexpr KernelTable kAvx2Table{Isa::kAvx2,     dot_avx2,       axpy_avx2,
                                 sum_abs2_avx2,  relu_avx2,      gemv_t_acc_avx2,
                                 gemv_acc_avx2,  ger_acc_avx2};

}  // namespace

const KernelTable* avx2_kernels() { return &kAvx2Table; }

}  // namespace coopsense::simd
