#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "coopsense/dataset.hpp"

using namespace coopsense;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("coopsense_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

ScenarioConfig small_scenario() {
    ScenarioConfig c;
    c.n_su = 6;
    c.n_bands = 5;
    return c;
}

}  // namespace

TEST(Energy, UnitModulusSamples) {
    const std::vector<std::complex<double>> ones(10, {1.0, 0.0});
    EXPECT_DOUBLE_EQ(accumulate_energy(ones), 1.0);
    const std::vector<std::complex<double>> quad{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    EXPECT_DOUBLE_EQ(accumulate_energy(quad), 1.0);
    EXPECT_THROW(accumulate_energy({}), std::invalid_argument);
}

TEST(Energy, NoiseOnlyShortcutMatchesSampleLaw) {
    // Mean and variance of the one-draw noise energy vs. the N_ED-sample average.
    ScenarioConfig c;
    auto rng = make_stream(21, StreamTag::kSnapshot);
    const int n = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double e = noise_only_energy(c, rng) / c.noise_power_w();
        s += e;
        s2 += e * e;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    EXPECT_NEAR(mean, 1.0, 0.01);
    // Var of the mean of N exponential(1) terms is 1/N.
    EXPECT_NEAR(var, 1.0 / c.n_ed, 0.05 / c.n_ed);
}

TEST(SenseSnapshot, ShapeAndDeterminism) {
    ScenarioConfig c;
    auto r0 = make_stream(1, StreamTag::kTopology);
    const auto topo = init_topology(c, r0);
    auto r1 = make_stream(2, StreamTag::kSnapshot);
    auto r2 = make_stream(2, StreamTag::kSnapshot);
    const auto pu = make_active_pu_state(16, 3, 2);
    const auto shadow = sample_shadow_field(topo.su_positions, c, r1);
    const auto shadow2 = sample_shadow_field(topo.su_positions, c, r2);
    const auto a = sense_snapshot(topo, pu, shadow, c, r1);
    const auto b = sense_snapshot(topo, pu, shadow2, c, r2);
    EXPECT_EQ(a.n_su, 32u);
    EXPECT_EQ(a.n_bands, 16u);
    EXPECT_EQ(a, b);
}

TEST(SenseSnapshot, VacantEntriesUncorrelatedUnderH0) {
    ScenarioConfig c;
    c.n_su = 4;
    c.n_bands = 3;
    auto r0 = make_stream(1, StreamTag::kTopology);
    const auto topo = init_topology(c, r0);
    const auto pu = make_inactive_pu_state(c.n_bands);
    auto rng = make_stream(3, StreamTag::kSnapshot);
    const int n = 20000;
    std::vector<std::vector<double>> cols(12, std::vector<double>(n));
    for (int t = 0; t < n; ++t) {
        const auto m = sense_snapshot(topo, pu, {std::vector<double>(4, 0.0)}, c, rng);
        for (std::size_t k = 0; k < 12; ++k) cols[k][t] = m.values[k];
    }
    auto corr = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double ma = 0, mb = 0;
        for (int i = 0; i < n; ++i) {
            ma += a[i];
            mb += b[i];
        }
        ma /= n;
        mb /= n;
        double sab = 0, saa = 0, sbb = 0;
        for (int i = 0; i < n; ++i) {
            sab += (a[i] - ma) * (b[i] - mb);
            saa += (a[i] - ma) * (a[i] - ma);
            sbb += (b[i] - mb) * (b[i] - mb);
        }
        return sab / std::sqrt(saa * sbb);
    };
    // 4 sigma of the null distribution of a sample correlation.
    const double bound = 4.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t a = 0; a < 12; ++a)
        for (std::size_t b = a + 1; b < 12; ++b) EXPECT_LT(std::fabs(corr(cols[a], cols[b])), bound);
}

TEST(HardDecision, ThresholdBoundaries) {
    SensingMatrix sd(SensingMode::kSoft, 1, 3);
    sd.values = {dbm_to_watt(-90.0), dbm_to_watt(-107.0), dbm_to_watt(-107.5)};
    const auto hd = hard_decision(sd, -107.0);
    EXPECT_EQ(hd.mode, SensingMode::kHard);
    EXPECT_EQ(hd.values[0], 1.0);
    EXPECT_EQ(hd.values[1], 1.0);  // T == gamma counts as detection
    EXPECT_EQ(hd.values[2], 0.0);
    EXPECT_THROW(hard_decision(hd, -107.0), std::invalid_argument);
}

TEST(HardDecision, NoiseFarBelowThresholdGivesZeros) {
    ScenarioConfig c;
    c.noise_psd_dbm_hz = -174.0 - 20.0 - 3.0;  // noise 20 dB below gamma = -107 dBm
    auto r0 = make_stream(1, StreamTag::kTopology);
    const auto topo = init_topology(c, r0);
    auto rng = make_stream(1, StreamTag::kSnapshot);
    const auto sd = sense_snapshot(topo, make_inactive_pu_state(16), {std::vector<double>(32, 0.0)}, c, rng);
    const auto hd = hard_decision(sd, -107.0);
    for (double v : hd.values) EXPECT_EQ(v, 0.0);
}

TEST(HardDecision, MonotoneAndInfiniteThresholds) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-120.0, -60.0);
    SensingMatrix sd(SensingMode::kSoft, 4, 4);
    for (auto& v : sd.values) v = dbm_to_watt(u(rng));
    const auto base = hard_decision(sd, -90.0);
    for (std::size_t k = 0; k < sd.values.size(); ++k) {
        auto raised = sd;
        raised.values[k] *= 3.0;
        const auto hd = hard_decision(raised, -90.0);
        for (std::size_t q = 0; q < hd.values.size(); ++q) EXPECT_GE(hd.values[q], base.values[q]);
    }
    for (double v : hard_decision(sd, -std::numeric_limits<double>::infinity()).values) EXPECT_EQ(v, 1.0);
    for (double v : hard_decision(sd, std::numeric_limits<double>::infinity()).values) EXPECT_EQ(v, 0.0);
}

TEST(Dataset, GenerationShapeLabelsAndDeterminism) {
    const auto c = small_scenario();
    const auto a = generate_dataset(c, 50, SensingMode::kSoft, 7);
    const auto b = generate_dataset(c, 50, SensingMode::kSoft, 7);
    ASSERT_EQ(a.size(), 50u);
    EXPECT_EQ(a.samples, b.samples);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.samples[i].snapshot_index, i);
        EXPECT_EQ(a.samples[i].matrix.n_su, 6u);
        EXPECT_EQ(a.samples[i].matrix.n_bands, 5u);
    }
    const auto other = generate_dataset(c, 50, SensingMode::kSoft, 8);
    EXPECT_NE(a.samples, other.samples);
    EXPECT_THROW(generate_dataset(c, 0, SensingMode::kSoft, 7), std::invalid_argument);
}

TEST(Dataset, SegmentsContinueTheSameTrajectory) {
    const auto c = small_scenario();
    const auto whole = generate_segment(c, SensingMode::kSoft, 3, 0, 30);
    const auto head = generate_segment(c, SensingMode::kSoft, 3, 0, 10);
    const auto tail = generate_segment(c, SensingMode::kSoft, 3, 10, 20);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(head.samples[i], whole.samples[i]);
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(tail.samples[i], whole.samples[10 + i]);
    // Train and eval snapshots draw from disjoint stream ids.
    std::set<std::uint64_t> ids;
    for (const auto& s : head.samples) ids.insert(derive_seed(3, StreamTag::kSnapshot, s.snapshot_index));
    for (const auto& s : tail.samples)
        EXPECT_EQ(ids.count(derive_seed(3, StreamTag::kSnapshot, s.snapshot_index)), 0u);
}

TEST(Dataset, HardGenerationEqualsThresholdedSoft) {
    auto c = small_scenario();
    c.gamma_noise_offset_db = 3.0;
    const auto sd = generate_dataset(c, 20, SensingMode::kSoft, 9);
    const auto hd = generate_dataset(c, 20, SensingMode::kHard, 9);
    EXPECT_EQ(to_hard_decision(sd).samples, hd.samples);
}

TEST(Dataset, LabelBalance) {
    auto c = small_scenario();
    c.n_su = 2;
    c.n_bands = 3;
    const std::size_t n = 2000;
    const auto ds = generate_dataset(c, n, SensingMode::kSoft, 10);
    const double frac = static_cast<double>(ds.count(Hypothesis::kPresent)) / n;
    EXPECT_NEAR(frac, 0.5, 3 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST(Dataset, StratifiedSplitKeepsClassProportions) {
    const auto ds = generate_dataset(small_scenario(), 200, SensingMode::kSoft, 11);
    auto rng = make_stream(1, StreamTag::kSplit);
    const auto [fit, val] = stratified_split(ds, 0.2, rng);
    EXPECT_EQ(fit.size() + val.size(), 200u);
    const auto n0 = ds.count(Hypothesis::kAbsent);
    EXPECT_EQ(val.count(Hypothesis::kAbsent), static_cast<std::size_t>(std::llround(0.2 * n0)));
    std::set<std::uint64_t> seen;
    for (const auto& s : fit.samples) seen.insert(s.snapshot_index);
    for (const auto& s : val.samples) EXPECT_EQ(seen.count(s.snapshot_index), 0u);
}

TEST(Standardizer, ZeroMeanUnitVarianceInDb) {
    const auto ds = generate_dataset(small_scenario(), 100, SensingMode::kSoft, 12);
    const auto st = fit_standardizer(ds);
    EXPECT_EQ(st.domain, Standardizer::Domain::kDbScale);
    double s = 0, s2 = 0;
    std::size_t n = 0;
    for (const auto& x : ds.samples) {
        for (double v : apply_standardizer(st, x.matrix)) {
            s += v;
            s2 += v * v;
            ++n;
        }
    }
    const double mean = s / static_cast<double>(n);
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(s2 / static_cast<double>(n) - mean * mean), 1.0, 1e-9);
}

TEST(Standardizer, HardInputIsIdentityAndConstantRejected) {
    auto c = small_scenario();
    c.gamma_noise_offset_db = 2.0;
    const auto hd = generate_dataset(c, 10, SensingMode::kHard, 13);
    const auto st = fit_standardizer(hd);
    EXPECT_EQ(st.domain, Standardizer::Domain::kIdentity);
    EXPECT_EQ(apply_standardizer(st, hd.samples[0].matrix), hd.samples[0].matrix.values);

    Dataset constant;
    constant.scenario = small_scenario();
    SensingMatrix m(SensingMode::kSoft, 6, 5);
    for (auto& v : m.values) v = 1e-10;
    constant.samples.push_back({m, Hypothesis::kAbsent, 0});
    constant.samples.push_back({m, Hypothesis::kPresent, 1});
    EXPECT_THROW(fit_standardizer(constant), std::invalid_argument);
    EXPECT_THROW(fit_standardizer(Dataset{}), std::invalid_argument);

    const auto back = standardizer_from_json(nlohmann::json(standardizer_to_json(Standardizer{
        Standardizer::Domain::kDbScale, -95.25, 6.5})));
    EXPECT_EQ(back.mean, -95.25);
    EXPECT_EQ(back.std, 6.5);
}

TEST(DatasetIo, RoundTripIsExactAndByteStable) {
    const auto ds = generate_dataset(small_scenario(), 25, SensingMode::kSoft, 14);
    const auto p1 = temp_path("rt1.jsonl");
    const auto p2 = temp_path("rt2.jsonl");
    save_dataset(ds, p1);
    const auto back = load_dataset(p1);
    EXPECT_EQ(back.mode, ds.mode);
    EXPECT_EQ(back.samples, ds.samples);
    EXPECT_EQ(back.scenario.n_su, 6);
    save_dataset(back, p2);
    EXPECT_EQ(slurp(p1), slurp(p2));

    auto hc = small_scenario();
    hc.gamma_noise_offset_db = 1.0;
    const auto hd = generate_dataset(hc, 5, SensingMode::kHard, 14);
    save_dataset(hd, p1);
    EXPECT_EQ(load_dataset(p1).samples, hd.samples);
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST(DatasetIo, TruncatedAndVersionErrors) {
    const auto ds = generate_dataset(small_scenario(), 10, SensingMode::kSoft, 15);
    const auto p = temp_path("trunc.jsonl");
    save_dataset(ds, p);
    std::string text = slurp(p);

    // Drop the final record.
    const auto cut = text.rfind('\n', text.size() - 2);
    {
        std::ofstream f(p, std::ios::binary);
        f << text.substr(0, cut + 1);
    }
    EXPECT_THROW(load_dataset(p), DatasetParseError);

    // Cut mid-record.
    {
        std::ofstream f(p, std::ios::binary);
        f << text.substr(0, text.size() / 2);
    }
    EXPECT_THROW(load_dataset(p), DatasetParseError);

    // Version bump.
    std::string bumped = text;
    const auto pos = bumped.find("\"version\":1");
    ASSERT_NE(pos, std::string::npos);
    bumped.replace(pos, 11, "\"version\":2");
    {
        std::ofstream f(p, std::ios::binary);
        f << bumped;
    }
    try {
        load_dataset(p);
        FAIL() << "expected a version error";
    } catch (const DatasetParseError& e) {
        EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
        EXPECT_EQ(e.line(), 1u);
    }
    EXPECT_THROW(load_dataset(temp_path("does_not_exist.jsonl")), std::runtime_error);
    std::filesystem::remove(p);
}
