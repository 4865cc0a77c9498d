#include "coopsense/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "coopsense/rng.hpp"

namespace coopsense::harness {
namespace {

volatile int g_bench_sink = 0;

std::vector<SensingMatrix> matrices_for(Method m, const Dataset& ds, double gamma_dbm) {
    std::vector<SensingMatrix> out;
    out.reserve(ds.size());
    const bool to_hard = method_mode(m) == SensingMode::kHard && ds.mode == SensingMode::kSoft;
    for (const auto& s : ds.samples) out.push_back(to_hard ? hard_decision(s.matrix, gamma_dbm) : s.matrix);
    return out;
}

std::vector<Hypothesis> labels_of(const Dataset& ds) {
    std::vector<Hypothesis> out;
    out.reserve(ds.size());
    for (const auto& s : ds.samples) out.push_back(s.label);
    return out;
}

Metrics evaluate_method(const FittedMethods& fm, Method m, const Dataset& eval_set) {
    const auto inputs = matrices_for(m, eval_set, fm.gamma_dbm);
    std::vector<Hypothesis> decisions;
    decisions.reserve(inputs.size());
    if (m == Method::kDcsSoft || m == Method::kDcsHard) {
        decisions = dcs::predict_batch(m == Method::kDcsSoft ? *fm.dcs_soft : *fm.dcs_hard, inputs);
    } else {
        for (const auto& x : inputs) decisions.push_back(fm.predict(m, x));
    }
    return metrics_from_decisions(decisions, labels_of(eval_set));
}

baselines::SvmConfig svm_config_from_json(const nlohmann::json& j) {
    baselines::SvmConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& key = it.key();
        if (key == "lambda_grid") c.lambda_grid = it->get<std::vector<double>>();
        else if (key == "epochs") c.epochs = it->get<int>();
        else if (key == "validation_fraction") c.validation_fraction = it->get<double>();
        else if (key == "seed") c.seed = it->get<std::uint64_t>();
        else throw std::invalid_argument("svm: unknown key '" + key + "'");
    }
    if (c.lambda_grid.empty()) throw std::invalid_argument("svm: lambda_grid must not be empty");
    for (double l : c.lambda_grid) {
        if (!(l > 0)) throw std::invalid_argument("svm: lambda values must be > 0");
    }
    if (c.epochs < 1) throw std::invalid_argument("svm: epochs must be >= 1");
    if (!(c.validation_fraction > 0 && c.validation_fraction < 1)) {
        throw std::invalid_argument("svm: validation_fraction must be in (0, 1)");
    }
    return c;
}

baselines::KonStatistic parse_kon_statistic(const std::string& s) {
    if (s == "max_band_votes") return baselines::KonStatistic::kMaxBandVotes;
    if (s == "total_votes") return baselines::KonStatistic::kTotalVotes;
    throw std::invalid_argument("unknown kon_statistic '" + s + "'");
}

std::size_t positive_count(const nlohmann::json& v, const char* name) {
    const auto n = v.get<long long>();
    if (n < 1) throw std::invalid_argument(std::string(name) + " must be >= 1");
    return static_cast<std::size_t>(n);
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

Metrics metrics_from_decisions(const std::vector<Hypothesis>& decisions,
                               const std::vector<Hypothesis>& labels) {
    if (decisions.size() != labels.size()) {
        throw std::invalid_argument("metrics: decision and label counts differ");
    }
    Metrics m;
    std::size_t fa = 0;
    std::size_t md = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == Hypothesis::kAbsent) {
            ++m.n_h0;
            fa += decisions[i] == Hypothesis::kPresent ? 1 : 0;
        } else {
            ++m.n_h1;
            md += decisions[i] == Hypothesis::kAbsent ? 1 : 0;
        }
    }
    m.p_fa_valid = m.n_h0 > 0;
    m.p_md_valid = m.n_h1 > 0;
    if (m.p_fa_valid) m.p_fa = static_cast<double>(fa) / static_cast<double>(m.n_h0);
    if (m.p_md_valid) m.p_md = static_cast<double>(md) / static_cast<double>(m.n_h1);
    if (m.valid()) m.sensing_error = m.p_fa + m.p_md;
    return m;
}

Metrics evaluate(const Predictor& predictor, const Dataset& eval_set) {
    if (eval_set.samples.empty()) throw std::invalid_argument("evaluate: empty evaluation set");
    std::vector<Hypothesis> decisions;
    decisions.reserve(eval_set.size());
    for (const auto& s : eval_set.samples) decisions.push_back(predictor(s.matrix));
    return metrics_from_decisions(decisions, labels_of(eval_set));
}

std::string_view method_name(Method m) {
    switch (m) {
        case Method::kDcsSoft: return "DCS-SD";
        case Method::kDcsHard: return "DCS-HD";
        case Method::kKon: return "KON";
        case Method::kSvmSoft: return "SVM-SD";
        case Method::kSvmHard: return "SVM-HD";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    for (Method m : kAllMethods) {
        if (method_name(m) == name) return m;
    }
    throw std::invalid_argument("unknown method '" + std::string(name) +
                                "' (expected DCS-SD, DCS-HD, KON, SVM-SD or SVM-HD)");
}

SensingMode method_mode(Method m) {
    return m == Method::kDcsSoft || m == Method::kSvmSoft ? SensingMode::kSoft : SensingMode::kHard;
}

bool FittedMethods::has(Method m) const {
    switch (m) {
        case Method::kDcsSoft: return dcs_soft.has_value();
        case Method::kDcsHard: return dcs_hard.has_value();
        case Method::kKon: return kon.has_value();
        case Method::kSvmSoft: return svm_soft.has_value();
        case Method::kSvmHard: return svm_hard.has_value();
    }
    return false;
}

std::vector<Method> FittedMethods::methods() const {
    std::vector<Method> out;
    for (Method m : kAllMethods) {
        if (has(m)) out.push_back(m);
    }
    return out;
}

Hypothesis FittedMethods::predict(Method m, const SensingMatrix& input) const {
    if (!has(m)) throw std::invalid_argument(std::string(method_name(m)) + " is not fitted");
    const SensingMode want = method_mode(m);
    if (want == SensingMode::kSoft && input.mode != SensingMode::kSoft) {
        throw std::invalid_argument(std::string(method_name(m)) + " needs soft-decision input");
    }
    if (want == SensingMode::kHard && input.mode == SensingMode::kSoft) {
        return predict(m, hard_decision(input, gamma_dbm));
    }
    switch (m) {
        case Method::kDcsSoft: return dcs::predict(*dcs_soft, input);
        case Method::kDcsHard: return dcs::predict(*dcs_hard, input);
        case Method::kKon: return baselines::predict_kon(*kon, input);
        case Method::kSvmSoft: return baselines::predict_svm(*svm_soft, input);
        case Method::kSvmHard: return baselines::predict_svm(*svm_hard, input);
    }
    throw std::logic_error("unreachable");
}

FittedMethods fit_methods(const Dataset& train_set, const std::vector<Method>& methods,
                          const ExperimentConfig& cfg) {
    FittedMethods fm;
    fm.gamma_dbm = train_set.scenario.effective_gamma_dbm();
    const bool soft = train_set.mode == SensingMode::kSoft;
    auto need = [&](Method m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };
    for (Method m : methods) {
        if (method_mode(m) == SensingMode::kSoft && !soft) {
            throw std::invalid_argument(std::string(method_name(m)) + " needs a soft-decision training set");
        }
    }
    std::optional<Dataset> hard_storage;
    auto hard = [&]() -> const Dataset& {
        if (!soft) return train_set;
        if (!hard_storage) hard_storage = to_hard_decision(train_set, fm.gamma_dbm);
        return *hard_storage;
    };

    if (need(Method::kDcsSoft)) {
        auto ens = dcs::train_permutation_ensemble(train_set, cfg.train, cfg.arch);
        fm.dcs_soft_identity = ens.candidates.front().result.model;
        fm.dcs_soft = std::move(ens.model);
    }
    if (need(Method::kDcsHard)) fm.dcs_hard = dcs::train_permutation_ensemble(hard(), cfg.train, cfg.arch).model;
    if (need(Method::kKon)) fm.kon = baselines::fit_kon(hard(), cfg.kon_statistic);
    if (need(Method::kSvmSoft)) fm.svm_soft = baselines::fit_linear_svm(train_set, cfg.svm);
    if (need(Method::kSvmHard)) fm.svm_hard = baselines::fit_linear_svm(hard(), cfg.svm);
    return fm;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::vector<Method>& methods,
                                 std::uint64_t seed) {
    ExperimentConfig c = cfg;
    c.train.seed = seed;
    c.svm.seed = seed;
    const auto train_set = generate_segment(c.scenario, SensingMode::kSoft, seed, 0, c.n_train);
    const auto eval_set = generate_segment(c.scenario, SensingMode::kSoft, seed, c.n_train, c.n_eval);
    const auto fm = fit_methods(train_set, methods, c);

    ExperimentOutcome out;
    for (Method m : methods) out.metrics[m] = evaluate_method(fm, m, eval_set);
    if (fm.dcs_soft_identity) {
        FittedMethods ident;
        ident.dcs_soft = fm.dcs_soft_identity;
        out.dcs_soft_identity = evaluate_method(ident, Method::kDcsSoft, eval_set);
    }
    return out;
}

void SweepSpec::validate() const {
    if (values.empty()) throw std::invalid_argument("sweep: value list must not be empty");
    if (repetitions < 1) throw std::invalid_argument("sweep: repetitions must be >= 1");
    if (methods.empty()) throw std::invalid_argument("sweep: method list must not be empty");
    if (threads < 1) throw std::invalid_argument("sweep: threads must be >= 1");
    for (double v : values) apply_sweep_value(base, param, v);
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& base, const std::string& param, double value) {
    ExperimentConfig c = base;
    auto as_count = [&](const char* name) {
        if (!(value >= 1) || value != std::floor(value)) {
            throw std::invalid_argument(std::string("sweep: ") + name + " values must be positive integers");
        }
        return static_cast<std::size_t>(value);
    };
    if (param == "n_train") {
        c.n_train = as_count("n_train");
        return c;
    }
    if (param == "n_eval") {
        c.n_eval = as_count("n_eval");
        return c;
    }
    if (param == "seed") throw std::invalid_argument("sweep: the scenario seed cannot be swept");
    auto j = nlohmann::json(scenario_to_json(base.scenario));
    if (j.contains(param) && j[param].is_number_integer()) {
        if (value != std::floor(value)) {
            throw std::invalid_argument("sweep: " + param + " values must be integers");
        }
        j[param] = static_cast<long long>(value);
    } else if (j.contains(param) && j[param].is_boolean()) {
        throw std::invalid_argument("sweep: " + param + " is not numeric");
    } else {
        j[param] = value;
    }
    try {
        c.scenario = scenario_from_json(j);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("sweep parameter '" + param + "': " + e.what());
    }
    return c;
}

SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    const std::size_t n_values = spec.values.size();
    const auto reps = static_cast<std::size_t>(spec.repetitions);

    struct Slot {
        std::optional<ExperimentOutcome> outcome;
        std::string error;
    };
    std::vector<Slot> slots(n_values * reps);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < slots.size(); t = next++) {
            const std::size_t vi = t / reps;
            const std::size_t r = t % reps;
            try {
                const auto cfg = apply_sweep_value(spec.base, spec.param, spec.values[vi]);
                slots[t].outcome = run_experiment(cfg, spec.methods, derive_seed(spec.seed, StreamTag::kRepetition, r));
            } catch (const std::exception& e) {
                slots[t].error = e.what();
            }
        }
    };
    const int n_threads = std::min<int>(spec.threads, static_cast<int>(slots.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SweepResult result;
    result.identity_error.assign(n_values, std::vector<std::optional<double>>(reps));
    result.ensemble_error.assign(n_values, std::vector<std::optional<double>>(reps));
    for (std::size_t vi = 0; vi < n_values; ++vi) {
        for (Method m : spec.methods) {
            SweepRow row;
            row.param = spec.values[vi];
            row.method = m;
            double sum_fa = 0.0, sum_md = 0.0;
            int n_fa = 0, n_md = 0;
            for (std::size_t r = 0; r < reps; ++r) {
                const auto& slot = slots[vi * reps + r];
                if (!slot.outcome) {
                    if (row.error.empty()) row.error = slot.error;
                    continue;
                }
                const auto& mt = slot.outcome->metrics.at(m);
                ++row.reps;
                if (mt.p_fa_valid) {
                    sum_fa += mt.p_fa;
                    ++n_fa;
                }
                if (mt.p_md_valid) {
                    sum_md += mt.p_md;
                    ++n_md;
                }
            }
            row.p_fa_valid = n_fa > 0;
            row.p_md_valid = n_md > 0;
            if (row.p_fa_valid) row.p_fa = sum_fa / n_fa;
            if (row.p_md_valid) row.p_md = sum_md / n_md;
            if (row.p_fa_valid && row.p_md_valid) row.sensing_error = row.p_fa + row.p_md;
            result.rows.push_back(row);
        }
        for (std::size_t r = 0; r < reps; ++r) {
            const auto& slot = slots[vi * reps + r];
            if (!slot.outcome) continue;
            if (slot.outcome->dcs_soft_identity && slot.outcome->dcs_soft_identity->valid()) {
                result.identity_error[vi][r] = slot.outcome->dcs_soft_identity->sensing_error;
            }
            const auto it = slot.outcome->metrics.find(Method::kDcsSoft);
            if (it != slot.outcome->metrics.end() && it->second.valid()) {
                result.ensemble_error[vi][r] = it->second.sensing_error;
            }
        }
    }
    return result;
}

std::string format_param(double v) {
    char buf[64];
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
    } else {
        std::snprintf(buf, sizeof buf, "%.10g", v);
    }
    return buf;
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
    out << "param,method,p_fa,p_md,sensing_error,reps\n";
    for (const auto& r : result.rows) {
        const bool both = r.p_fa_valid && r.p_md_valid;
        out << format_param(r.param) << ',' << method_name(r.method) << ','
            << (r.p_fa_valid ? fixed6(r.p_fa) : "") << ',' << (r.p_md_valid ? fixed6(r.p_md) : "") << ','
            << (both ? fixed6(r.sensing_error) : "") << ',' << r.reps << '\n';
    }
}

void write_plot_script(const SweepSpec& spec, const std::string& csv_path, std::ostream& out) {
    out << "# run from the directory holding the CSV: gnuplot -persist <this file>\n"
        << "set datafile separator ','\n"
        << "set key autotitle columnhead\n"
        << "set xlabel '" << spec.param << "'\n"
        << "set ylabel 'sensing error (P_FA + P_MD)'\n"
        << "set grid\n"
        << "plot \\\n";
    for (std::size_t i = 0; i < spec.methods.size(); ++i) {
        const auto name = method_name(spec.methods[i]);
        out << "  '" << csv_path << "' using 1:(strcol(2) eq '" << name << "' ? $5 : NaN) with linespoints title '"
            << name << "'" << (i + 1 < spec.methods.size() ? ", \\\n" : "\n");
    }
}

LatencyReport bench_latency(const FittedMethods& models, const Dataset& eval_set, int warmup, int iters) {
    if (iters < 1) throw std::invalid_argument("bench_latency: iters must be >= 1");
    if (warmup < 0) throw std::invalid_argument("bench_latency: warmup must be >= 0");
    if (eval_set.samples.empty()) throw std::invalid_argument("bench_latency: empty evaluation set");
    const auto methods = models.methods();
    if (methods.empty()) throw std::invalid_argument("bench_latency: no fitted models");

    LatencyReport report;
    for (Method m : methods) {
        const auto inputs = matrices_for(m, eval_set, models.gamma_dbm);
        std::size_t cursor = 0;
        int sink = 0;
        auto call = [&] {
            sink += static_cast<int>(models.predict(m, inputs[cursor]));
            cursor = (cursor + 1) % inputs.size();
        };
        for (int i = 0; i < warmup; ++i) call();
        std::vector<double> ms(static_cast<std::size_t>(iters));
        for (auto& t : ms) {
            const auto t0 = std::chrono::steady_clock::now();
            call();
            const auto t1 = std::chrono::steady_clock::now();
            t = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
        g_bench_sink = sink;

        LatencyRow row;
        row.method = m;
        row.n_su = eval_set.n_su();
        row.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
        std::sort(ms.begin(), ms.end());
        row.median_ms = ms.size() % 2 ? ms[ms.size() / 2] : 0.5 * (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]);
        const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(ms.size())));
        row.p95_ms = ms[std::max<std::size_t>(rank, 1) - 1];
        report.rows.push_back(row);
    }
    return report;
}

void write_latency_csv(const LatencyReport& report, std::ostream& out) {
    out << "method,n_su,mean_ms,median_ms,p95_ms\n";
    for (const auto& r : report.rows) {
        out << method_name(r.method) << ',' << r.n_su << ',' << fixed6(r.mean_ms) << ',' << fixed6(r.median_ms)
            << ',' << fixed6(r.p95_ms) << '\n';
    }
}

void save_checkpoint(const FittedMethods& models, const ScenarioConfig& scenario,
                     const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["format"] = "coopsense-checkpoint";
    j["version"] = kCheckpointVersion;
    j["scenario"] = scenario_to_json(scenario);
    j["gamma_dbm"] = models.gamma_dbm;
    auto payloads = nlohmann::ordered_json::array();
    auto add = [&](const char* tag, nlohmann::ordered_json body) {
        nlohmann::ordered_json p;
        p["tag"] = tag;
        p["model"] = std::move(body);
        payloads.push_back(std::move(p));
    };
    if (models.dcs_soft) add("dcs-sd", dcs::model_to_json(*models.dcs_soft));
    if (models.dcs_hard) add("dcs-hd", dcs::model_to_json(*models.dcs_hard));
    if (models.kon) add("kon", baselines::kon_to_json(*models.kon));
    if (models.svm_soft) add("svm-sd", baselines::svm_to_json(*models.svm_soft));
    if (models.svm_hard) add("svm-hd", baselines::svm_to_json(*models.svm_hard));
    if (models.dcs_soft_identity) add("dcs-sd-identity", dcs::model_to_json(*models.dcs_soft_identity));
    j["payloads"] = std::move(payloads);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << j.dump(1) << '\n';
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path.string() + ": not valid JSON: " + e.what());
    }
    if (j.value("format", std::string()) != "coopsense-checkpoint") {
        throw std::runtime_error(path.string() + ": not a checkpoint file");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
        throw std::runtime_error(path.string() + ": unsupported checkpoint version " + std::to_string(version));
    }
    LoadedCheckpoint out;
    out.scenario = scenario_from_json(j.at("scenario"));
    out.models.gamma_dbm = j.at("gamma_dbm").get<double>();
    for (const auto& p : j.at("payloads")) {
        const auto tag = p.at("tag").get<std::string>();
        const auto& body = p.at("model");
        if (tag == "dcs-sd") out.models.dcs_soft = dcs::model_from_json(body);
        else if (tag == "dcs-hd") out.models.dcs_hard = dcs::model_from_json(body);
        else if (tag == "kon") out.models.kon = baselines::kon_from_json(body);
        else if (tag == "svm-sd") out.models.svm_soft = baselines::svm_from_json(body);
        else if (tag == "svm-hd") out.models.svm_hard = baselines::svm_from_json(body);
        else if (tag == "dcs-sd-identity") out.models.dcs_soft_identity = dcs::model_from_json(body);
        else throw std::runtime_error(path.string() + ": unknown payload tag '" + tag + "'");
    }
    return out;
}

ConfigFile parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    ConfigFile cf;
    auto& ex = cf.experiment;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& key = it.key();
        if (key == "scenario") ex.scenario = scenario_from_json(*it);
        else if (key == "arch") ex.arch = dcs::arch_from_json(*it);
        else if (key == "train") ex.train = dcs::train_config_from_json(*it);
        else if (key == "svm") ex.svm = svm_config_from_json(*it);
        else if (key != "experiment" && key != "sweep" && key != "bench") {
            throw std::invalid_argument("config: unknown section '" + key + "'");
        }
    }
    if (j.contains("experiment")) {
        const auto& e = j["experiment"];
        for (auto it = e.begin(); it != e.end(); ++it) {
            const auto& key = it.key();
            if (key == "n_train") ex.n_train = positive_count(*it, "experiment.n_train");
            else if (key == "n_eval") ex.n_eval = positive_count(*it, "experiment.n_eval");
            else if (key == "kon_statistic") ex.kon_statistic = parse_kon_statistic(it->get<std::string>());
            else throw std::invalid_argument("experiment: unknown key '" + key + "'");
        }
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        SweepSpec sp;
        for (auto it = s.begin(); it != s.end(); ++it) {
            const auto& key = it.key();
            if (key == "param") sp.param = it->get<std::string>();
            else if (key == "values") sp.values = it->get<std::vector<double>>();
            else if (key == "repetitions") sp.repetitions = it->get<int>();
            else if (key == "seed") sp.seed = it->get<std::uint64_t>();
            else if (key == "threads") sp.threads = it->get<int>();
            else if (key == "methods") {
                sp.methods.clear();
                for (const auto& m : *it) sp.methods.push_back(parse_method(m.get<std::string>()));
            } else {
                throw std::invalid_argument("sweep: unknown key '" + key + "'");
            }
        }
        if (sp.param.empty()) throw std::invalid_argument("sweep: 'param' is required");
        sp.base = ex;
        sp.validate();
        cf.sweep = std::move(sp);
    }
    if (j.contains("bench")) {
        const auto& b = j["bench"];
        for (auto it = b.begin(); it != b.end(); ++it) {
            const auto& key = it.key();
            if (key == "n_su") cf.bench.n_su_values = it->get<std::vector<int>>();
            else if (key == "warmup") cf.bench.warmup = it->get<int>();
            else if (key == "iters") cf.bench.iters = it->get<int>();
            else throw std::invalid_argument("bench: unknown key '" + key + "'");
        }
        if (cf.bench.iters < 1) throw std::invalid_argument("bench: iters must be >= 1");
        if (cf.bench.warmup < 0) throw std::invalid_argument("bench: warmup must be >= 0");
        for (int n : cf.bench.n_su_values) {
            if (n < 2) throw std::invalid_argument("bench: n_su values must be >= 2");
        }
    }
    return cf;
}

ConfigFile load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("config file " + path.string() + ": " + e.what());
    }
    try {
        return parse_config(j);
    } catch (const std::exception& e) {
        throw std::runtime_error("config file " + path.string() + ": " + e.what());
    }
}

}  // namespace coopsense::harness
