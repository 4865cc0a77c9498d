#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "coopsense/simd/kernels.hpp"

using namespace coopsense::simd;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

// Lengths chosen to hit every tail path of 4- and 8-wide blocks.
const std::size_t kLengths[] = {0, 1, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 72, 513};

class KernelEquivalence : public ::testing::Test {
protected:
    void SetUp() override {
        if (avx2_kernels() == nullptr || !isa_supported(Isa::kAvx2)) GTEST_SKIP() << "AVX2 not available";
        s = &scalar_kernels();
        v = avx2_kernels();
    }
    const KernelTable* s = nullptr;
    const KernelTable* v = nullptr;
    std::mt19937_64 rng{7};
};

}  // namespace

TEST(Kernels, ScalarReferenceValues) {
    const auto& k = scalar_kernels();
    const double a[] = {1, 2, 3};
    const double b[] = {4, -5, 6};
    EXPECT_DOUBLE_EQ(k.dot(a, b, 3), 12.0);
    double y[] = {1, 1, 1};
    k.axpy(2.0, a, y, 3);
    EXPECT_DOUBLE_EQ(y[2], 7.0);
    const std::complex<double> z[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    EXPECT_DOUBLE_EQ(k.sum_abs2(z, 4) / 4, 1.0);
    const double r_in[] = {-1, 0, 2};
    double r_out[3];
    k.relu(r_in, r_out, 3);
    EXPECT_EQ(r_out[0], 0.0);
    EXPECT_EQ(r_out[1], 0.0);
    EXPECT_EQ(r_out[2], 2.0);
}

TEST(Kernels, GemvOracles) {
    std::mt19937_64 rng(3);
    const std::size_t k = 5, n = 11;
    const auto w = random_vec(k * n, rng);
    const auto x = random_vec(k, rng);
    const auto g = random_vec(n, rng);
    const auto& t = scalar_kernels();

    std::vector<double> y(n, 0.5), ref(n, 0.5);
    t.gemv_t_acc(x.data(), w.data(), y.data(), k, n);
    for (std::size_t o = 0; o < n; ++o)
        for (std::size_t r = 0; r < k; ++r) ref[o] += x[r] * w[r * n + o];
    for (std::size_t o = 0; o < n; ++o) EXPECT_EQ(y[o], ref[o]);

    std::vector<double> yr(k, 0.0);
    t.gemv_acc(w.data(), g.data(), yr.data(), k, n);
    for (std::size_t r = 0; r < k; ++r) {
        double acc = 0.0;
        for (std::size_t o = 0; o < n; ++o) acc += w[r * n + o] * g[o];
        EXPECT_NEAR(yr[r], acc, 1e-12);
    }

    std::vector<double> a(k * n, 1.0);
    t.ger_acc(x.data(), g.data(), a.data(), k, n);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t o = 0; o < n; ++o) EXPECT_EQ(a[r * n + o], 1.0 + x[r] * g[o]);
}

TEST_F(KernelEquivalence, DotAndSumAbs2AgreeToRounding) {
    for (auto n : kLengths) {
        const auto a = random_vec(n, rng);
        const auto b = random_vec(n, rng);
        const double ref = s->dot(a.data(), b.data(), n);
        double mag = 0.0;
        for (std::size_t i = 0; i < n; ++i) mag += std::fabs(a[i] * b[i]);
        EXPECT_NEAR(v->dot(a.data(), b.data(), n), ref, 1e-14 * (mag + 1)) << "n=" << n;

        std::vector<std::complex<double>> z(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = {a[i], b[i]};
        const double e_ref = s->sum_abs2(z.data(), n);
        EXPECT_NEAR(v->sum_abs2(z.data(), n), e_ref, 1e-14 * (e_ref + 1)) << "n=" << n;
    }
}

TEST_F(KernelEquivalence, ElementwiseKernelsBitIdentical) {
    for (auto n : kLengths) {
        const auto x = random_vec(n, rng);
        auto y1 = random_vec(n, rng);
        auto y2 = y1;
        s->axpy(0.37, x.data(), y1.data(), n);
        v->axpy(0.37, x.data(), y2.data(), n);
        EXPECT_EQ(y1, y2) << "axpy n=" << n;

        std::vector<double> r1(n), r2(n);
        s->relu(x.data(), r1.data(), n);
        v->relu(x.data(), r2.data(), n);
        EXPECT_EQ(r1, r2) << "relu n=" << n;
    }
}

TEST_F(KernelEquivalence, MatrixKernels) {
    for (std::size_t k : {1u, 3u, 9u, 72u}) {
        for (std::size_t n : {1u, 2u, 5u, 8u, 13u, 16u}) {
            const auto w = random_vec(k * n, rng);
            const auto x = random_vec(k, rng);
            const auto g = random_vec(n, rng);

            auto y1 = random_vec(n, rng);
            auto y2 = y1;
            s->gemv_t_acc(x.data(), w.data(), y1.data(), k, n);
            v->gemv_t_acc(x.data(), w.data(), y2.data(), k, n);
            EXPECT_EQ(y1, y2) << "gemv_t_acc k=" << k << " n=" << n;

            auto a1 = random_vec(k * n, rng);
            auto a2 = a1;
            s->ger_acc(x.data(), g.data(), a1.data(), k, n);
            v->ger_acc(x.data(), g.data(), a2.data(), k, n);
            EXPECT_EQ(a1, a2) << "ger_acc k=" << k << " n=" << n;

            std::vector<double> r1(k, 0.25), r2(k, 0.25);
            s->gemv_acc(w.data(), g.data(), r1.data(), k, n);
            v->gemv_acc(w.data(), g.data(), r2.data(), k, n);
            for (std::size_t r = 0; r < k; ++r) EXPECT_NEAR(r1[r], r2[r], 1e-13) << "gemv_acc";
        }
    }
}

TEST(KernelDispatch, SwitchingIsaChangesActiveTable) {
    const Isa before = active_isa();
    set_active_isa(Isa::kScalar);
    EXPECT_EQ(active_isa(), Isa::kScalar);
    EXPECT_EQ(&active(), &scalar_kernels());
    if (isa_supported(Isa::kAvx2)) {
        set_active_isa(Isa::kAvx2);
        EXPECT_EQ(active_isa(), Isa::kAvx2);
    } else {
        EXPECT_THROW(set_active_isa(Isa::kAvx2), std::exception);
    }
    set_active_isa(before);
    EXPECT_EQ(isa_name(Isa::kScalar), "scalar");
}
