#include "coopsense/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "coopsense/simd/kernels.hpp"

namespace coopsense::baselines {
namespace {

void require_both_labels(const Dataset& ds, const char* who) {
    if (ds.count(Hypothesis::kAbsent) == 0 || ds.count(Hypothesis::kPresent) == 0) {
        throw std::invalid_argument(std::string(who) +
                                    ": training set must contain both H0 and H1 samples");
    }
}

}  // namespace

int kon_statistic(const SensingMatrix& hd, KonStatistic statistic) {
    if (hd.mode != SensingMode::kHard) {
        throw std::invalid_argument("kon_statistic: K-out-of-N needs hard-decision input");
    }
    if (statistic == KonStatistic::kTotalVotes) {
        int total = 0;
        for (double v : hd.values) total += v != 0.0 ? 1 : 0;
        return total;
    }
    int best = 0;
    for (std::size_t j = 0; j < hd.n_bands; ++j) {
        int votes = 0;
        for (std::size_t i = 0; i < hd.n_su; ++i) votes += hd.at(i, j) != 0.0 ? 1 : 0;
        best = std::max(best, votes);
    }
    return best;
}

int kon_statistic_max(std::size_t n_su, std::size_t n_bands, KonStatistic statistic) {
    return static_cast<int>(statistic == KonStatistic::kTotalVotes ? n_su * n_bands : n_su);
}

EmpiricalError kon_error(const Dataset& hd, int k, KonStatistic statistic) {
    require_both_labels(hd, "kon_error");
    std::size_t fa = 0;
    std::size_t md = 0;
    for (const auto& s : hd.samples) {
        const bool says_h1 = kon_statistic(s.matrix, statistic) >= k;
        if (s.label == Hypothesis::kAbsent && says_h1) ++fa;
        if (s.label == Hypothesis::kPresent && !says_h1) ++md;
    }
    return {static_cast<double>(fa) / static_cast<double>(hd.count(Hypothesis::kAbsent)),
            static_cast<double>(md) / static_cast<double>(hd.count(Hypothesis::kPresent))};
}

KonRule fit_kon(const Dataset& hd, KonStatistic statistic) {
    require_both_labels(hd, "fit_kon");
    if (hd.mode != SensingMode::kHard) {
        throw std::invalid_argument("fit_kon: K-out-of-N needs a hard-decision dataset");
    }
    const int k_max = kon_statistic_max(hd.n_su(), hd.n_bands(), statistic);
    // Histogram the statistic per label once, then sweep k with running counts.
    std::vector<std::size_t> h0(static_cast<std::size_t>(k_max) + 1, 0);
    std::vector<std::size_t> h1(static_cast<std::size_t>(k_max) + 1, 0);
    for (const auto& s : hd.samples) {
        const auto v = static_cast<std::size_t>(kon_statistic(s.matrix, statistic));
        (s.label == Hypothesis::kAbsent ? h0 : h1)[v]++;
    }
    const double n0 = static_cast<double>(hd.count(Hypothesis::kAbsent));
    const double n1 = static_cast<double>(hd.count(Hypothesis::kPresent));
    // k = 0: everything is H1.
    std::size_t fa = static_cast<std::size_t>(n0);
    std::size_t md = 0;
    KonRule best{0, statistic};
    double best_err = static_cast<double>(fa) / n0 + static_cast<double>(md) / n1;
    for (int k = 1; k <= k_max; ++k) {
        // Samples with statistic == k - 1 flip from H1 to H0.
        fa -= h0[static_cast<std::size_t>(k - 1)];
        md += h1[static_cast<std::size_t>(k - 1)];
        const double err = static_cast<double>(fa) / n0 + static_cast<double>(md) / n1;
        if (err < best_err) {
            best_err = err;
            best.k = k;
        }
    }
    return best;
}

Hypothesis predict_kon(const KonRule& rule, const SensingMatrix& hd) {
    return kon_statistic(hd, rule.statistic) >= rule.k ? Hypothesis::kPresent : Hypothesis::kAbsent;
}

double svm_objective(const SvmSolution& s, const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels, double lambda) {
    const auto& k = simd::active();
    double hinge = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double score = k.dot(s.weights.data(), features[i].data(), s.weights.size()) + s.bias;
        hinge += std::max(0.0, 1.0 - labels[i] * score);
    }
    const double norm2 = k.dot(s.weights.data(), s.weights.data(), s.weights.size()) + s.bias * s.bias;
    return 0.5 * lambda * norm2 + hinge / static_cast<double>(features.size());
}

SvmSolution train_svm(const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
                      double lambda, int epochs, std::uint64_t seed,
                      std::vector<double>* objective_trace) {
    if (features.empty() || features.size() != labels.size()) {
        throw std::invalid_argument("train_svm: need one label per feature vector");
    }
    if (!(lambda > 0)) throw std::invalid_argument("train_svm: lambda must be > 0");
    const std::size_t dim = features.front().size();
    for (const auto& f : features) {
        if (f.size() != dim) throw std::invalid_argument("train_svm: ragged feature vectors");
    }
    const auto& k = simd::active();

    SvmSolution w{std::vector<double>(dim, 0.0), 0.0};
    SvmSolution avg{std::vector<double>(dim, 0.0), 0.0};
    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto rng = make_stream(seed, StreamTag::kSvm);
    std::uint64_t t = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i : order) {
            ++t;
            const double td = static_cast<double>(t);
            const double eta = 1.0 / (lambda * td);
            const double y = labels[i];
            const double margin = y * (k.dot(w.weights.data(), features[i].data(), dim) + w.bias);
            const double shrink = 1.0 - 1.0 / td;
            for (auto& v : w.weights) v *= shrink;
            w.bias *= shrink;
            if (margin < 1.0) {
                k.axpy(eta * y, features[i].data(), w.weights.data(), dim);
                w.bias += eta * y;
            }
            // Running mean of the iterates.
            const double a = 1.0 / td;
            for (std::size_t d = 0; d < dim; ++d) avg.weights[d] += a * (w.weights[d] - avg.weights[d]);
            avg.bias += a * (w.bias - avg.bias);
        }
        if (objective_trace) objective_trace->push_back(svm_objective(avg, features, labels, lambda));
    }
    return avg;
}

std::vector<double> svm_features(const LinearSvmModel& model, const SensingMatrix& m) {
    if (m.mode != model.mode) {
        throw std::invalid_argument("SVM expects " + std::string(mode_name(model.mode)) +
                                    " input, got " + std::string(mode_name(m.mode)));
    }
    if (m.values.size() != model.weights.size()) {
        throw std::invalid_argument("SVM input size does not match the model");
    }
    return apply_standardizer(model.standardizer, m);
}

double svm_score(const LinearSvmModel& model, const SensingMatrix& m) {
    const auto x = svm_features(model, m);
    return simd::active().dot(model.weights.data(), x.data(), x.size()) + model.bias;
}

Hypothesis predict_svm(const LinearSvmModel& model, const SensingMatrix& m) {
    return svm_score(model, m) >= 0.0 ? Hypothesis::kPresent : Hypothesis::kAbsent;
}

LinearSvmModel fit_linear_svm(const Dataset& train, const SvmConfig& cfg) {
    require_both_labels(train, "fit_linear_svm");
    if (cfg.lambda_grid.empty()) throw std::invalid_argument("fit_linear_svm: empty lambda grid");

    LinearSvmModel model;
    model.mode = train.mode;
    model.standardizer = fit_standardizer(train);
    model.weights.assign(train.n_su() * train.n_bands(), 0.0);

    auto encode = [&](const Dataset& ds, std::vector<std::vector<double>>& x, std::vector<int>& y) {
        for (const auto& s : ds.samples) {
            x.push_back(svm_features(model, s.matrix));
            y.push_back(s.label == Hypothesis::kPresent ? 1 : -1);
        }
    };

    double best_lambda = cfg.lambda_grid.front();
    if (cfg.lambda_grid.size() > 1) {
        auto split_rng = make_stream(cfg.seed, StreamTag::kSplit);
        const auto [fit, val] = stratified_split(train, cfg.validation_fraction, split_rng);
        std::vector<std::vector<double>> xf;
        std::vector<int> yf;
        encode(fit, xf, yf);
        double best_err = INFINITY;
        for (double lambda : cfg.lambda_grid) {
            const auto sol = train_svm(xf, yf, lambda, cfg.epochs, cfg.seed);
            LinearSvmModel candidate = model;
            candidate.weights = sol.weights;
            candidate.bias = sol.bias;
            std::size_t fa = 0, md = 0, n0 = 0, n1 = 0;
            for (const auto& s : val.samples) {
                const bool h1 = predict_svm(candidate, s.matrix) == Hypothesis::kPresent;
                if (s.label == Hypothesis::kAbsent) {
                    ++n0;
                    fa += h1 ? 1 : 0;
                } else {
                    ++n1;
                    md += h1 ? 0 : 1;
                }
            }
            const double err = (n0 ? static_cast<double>(fa) / static_cast<double>(n0) : 0.0) +
                               (n1 ? static_cast<double>(md) / static_cast<double>(n1) : 0.0);
            if (err < best_err) {
                best_err = err;
                best_lambda = lambda;
            }
        }
    }

    std::vector<std::vector<double>> x;
    std::vector<int> y;
    encode(train, x, y);
    const auto sol = train_svm(x, y, best_lambda, cfg.epochs, cfg.seed);
    model.weights = sol.weights;
    model.bias = sol.bias;
    model.lambda = best_lambda;
    return model;
}

nlohmann::ordered_json kon_to_json(const KonRule& rule) {
    nlohmann::ordered_json j;
    j["k"] = rule.k;
    j["statistic"] = rule.statistic == KonStatistic::kMaxBandVotes ? "max_band_votes" : "total_votes";
    return j;
}

KonRule kon_from_json(const nlohmann::json& j) {
    KonRule r;
    r.k = j.at("k").get<int>();
    const auto stat = j.at("statistic").get<std::string>();
    if (stat == "max_band_votes") r.statistic = KonStatistic::kMaxBandVotes;
    else if (stat == "total_votes") r.statistic = KonStatistic::kTotalVotes;
    else throw std::invalid_argument("unknown K-out-of-N statistic '" + stat + "'");
    if (r.k < 0) throw std::invalid_argument("K-out-of-N threshold must be >= 0");
    return r;
}

nlohmann::ordered_json svm_to_json(const LinearSvmModel& model) {
    nlohmann::ordered_json j;
    j["mode"] = std::string(mode_name(model.mode));
    j["lambda"] = model.lambda;
    j["standardizer"] = standardizer_to_json(model.standardizer);
    j["bias"] = model.bias;
    j["weights"] = model.weights;
    return j;
}

LinearSvmModel svm_from_json(const nlohmann::json& j) {
    LinearSvmModel m;
    m.mode = parse_mode(j.at("mode").get<std::string>());
    m.lambda = j.at("lambda").get<double>();
    m.standardizer = standardizer_from_json(j.at("standardizer"));
    m.bias = j.at("bias").get<double>();
    m.weights = j.at("weights").get<std::vector<double>>();
    return m;
}

}  // namespace coopsense::baselines
