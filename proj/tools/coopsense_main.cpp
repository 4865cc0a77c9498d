// coopsense: command-line front end for dataset generation, training,
// evaluation, sweeps and latency benchmarks.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coopsense/harness.hpp"
#include "coopsense/simd/kernels.hpp"

namespace cs = coopsense;
namespace hs = coopsense::harness;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string mode = "sd";
    std::string out;
};

hs::ConfigFile load(const Globals& g) {
    if (g.config.empty()) return hs::parse_config(nlohmann::json::object());
    return hs::load_config(g.config);
}

std::uint64_t seed_of(const Globals& g, const hs::ConfigFile& cf) {
    return g.seed ? *g.seed : cf.experiment.scenario.seed;
}

void require_out(const Globals& g, const char* cmd) {
    if (g.out.empty()) throw CLI::RequiredError(std::string(cmd) + " needs --out");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    return f;
}

std::vector<hs::Method> default_methods(cs::SensingMode mode) {
    if (mode == cs::SensingMode::kSoft) return {hs::Method::kDcsSoft, hs::Method::kKon, hs::Method::kSvmSoft};
    return {hs::Method::kDcsHard, hs::Method::kKon, hs::Method::kSvmHard};
}

std::vector<hs::Method> parse_methods(const std::vector<std::string>& names, cs::SensingMode mode) {
    if (names.empty()) return default_methods(mode);
    std::vector<hs::Method> out;
    for (const auto& n : names) out.push_back(hs::parse_method(n));
    return out;
}

void print_metrics(std::ostream& os, hs::Method m, const hs::Metrics& mt) {
    auto field = [](bool valid, double v) {
        if (!valid) return std::string("n/a");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", v);
        return std::string(buf);
    };
    os << hs::method_name(m) << " p_fa=" << field(mt.p_fa_valid, mt.p_fa)
       << " p_md=" << field(mt.p_md_valid, mt.p_md)
       << " sensing_error=" << field(mt.valid(), mt.sensing_error) << " n_h0=" << mt.n_h0
       << " n_h1=" << mt.n_h1 << '\n';
}

int cmd_generate(const Globals& g, std::optional<std::size_t> samples, std::uint64_t first) {
    require_out(g, "generate");
    const auto cf = load(g);
    const auto mode = cs::parse_mode(g.mode);
    const std::size_t n = samples ? *samples : cf.experiment.n_train;
    if (n < 1) throw std::invalid_argument("--samples must be >= 1");
    const auto ds = cs::generate_segment(cf.experiment.scenario, mode, seed_of(g, cf), first, n);
    cs::save_dataset(ds, g.out);
    std::cerr << "wrote " << ds.size() << " " << cs::mode_name(mode) << " samples ("
              << ds.count(cs::Hypothesis::kPresent) << " H1) to " << g.out << '\n';
    return 0;
}

int cmd_train(const Globals& g, const std::string& data, const std::vector<std::string>& method_names) {
    require_out(g, "train");
    const auto cf = load(g);
    const auto mode = cs::parse_mode(g.mode);
    const auto seed = seed_of(g, cf);
    auto ex = cf.experiment;
    ex.train.seed = seed;
    ex.svm.seed = seed;

    cs::Dataset train_set;
    if (!data.empty()) {
        train_set = cs::load_dataset(data);
    } else {
        train_set = cs::generate_segment(ex.scenario, cs::SensingMode::kSoft, seed, 0, ex.n_train);
        if (mode == cs::SensingMode::kHard) train_set = cs::to_hard_decision(train_set);
    }
    const auto fitted = hs::fit_methods(train_set, parse_methods(method_names, mode), ex);
    hs::save_checkpoint(fitted, train_set.scenario, g.out);
    std::cerr << "trained";
    for (auto m : fitted.methods()) std::cerr << ' ' << hs::method_name(m);
    std::cerr << " on " << train_set.size() << " samples; checkpoint " << g.out << '\n';
    return 0;
}

int cmd_eval(const Globals& g, const std::string& model, const std::string& data) {
    const auto ckpt = hs::load_checkpoint(model);
    cs::Dataset eval_set;
    if (!data.empty()) {
        eval_set = cs::load_dataset(data);
    } else {
        // Continue the training trajectory: snapshots after the training segment.
        const auto cf = load(g);
        eval_set = cs::generate_segment(ckpt.scenario, cs::SensingMode::kSoft, seed_of(g, cf),
                                        cf.experiment.n_train, cf.experiment.n_eval);
    }
    std::ofstream csv;
    if (!g.out.empty()) {
        csv = open_out(g.out);
        csv << "method,p_fa,p_md,sensing_error,n_h0,n_h1\n";
    }
    for (auto m : ckpt.models.methods()) {
        if (hs::method_mode(m) == cs::SensingMode::kSoft && eval_set.mode != cs::SensingMode::kSoft) continue;
        const auto mt = hs::evaluate([&](const cs::SensingMatrix& x) { return ckpt.models.predict(m, x); },
                                     eval_set);
        print_metrics(std::cout, m, mt);
        if (csv.is_open()) {
            char line[256];
            std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.6f,%zu,%zu\n",
                          std::string(hs::method_name(m)).c_str(), mt.p_fa, mt.p_md, mt.sensing_error,
                          mt.n_h0, mt.n_h1);
            csv << line;
        }
    }
    return 0;
}

int cmd_sweep(const Globals& g, std::optional<int> threads, bool plot) {
    require_out(g, "sweep");
    auto cf = load(g);
    if (!cf.sweep) throw std::invalid_argument("config has no 'sweep' section");
    auto spec = *cf.sweep;
    if (g.seed) spec.seed = *g.seed;
    if (threads) spec.threads = *threads;
    const auto result = hs::run_sweep(spec);
    {
        auto f = open_out(g.out);
        hs::write_sweep_csv(result, f);
    }
    int failed = 0;
    for (const auto& r : result.rows) {
        if (!r.error.empty()) {
            ++failed;
            std::cerr << "warning: " << spec.param << "=" << hs::format_param(r.param) << " "
                      << hs::method_name(r.method) << ": " << r.error << '\n';
        }
    }
    if (plot) {
        auto f = open_out(g.out + ".gp");
        hs::write_plot_script(spec, std::filesystem::path(g.out).filename().string(), f);
    }
    std::cerr << "wrote " << result.rows.size() << " rows to " << g.out << '\n';
    return failed ? 1 : 0;
}

int cmd_bench(const Globals& g, const std::string& model, std::optional<int> iters,
              std::optional<int> warmup, const std::vector<std::string>& method_names) {
    const auto cf = load(g);
    const auto seed = seed_of(g, cf);
    const int n_iters = iters ? *iters : cf.bench.iters;
    const int n_warmup = warmup ? *warmup : cf.bench.warmup;

    hs::LatencyReport report;
    if (!model.empty()) {
        const auto ckpt = hs::load_checkpoint(model);
        const auto eval_set = cs::generate_segment(ckpt.scenario, cs::SensingMode::kSoft, seed,
                                                   cf.experiment.n_train, cf.experiment.n_eval);
        report = hs::bench_latency(ckpt.models, eval_set, n_warmup, n_iters);
    } else {
        std::vector<int> n_su_values = cf.bench.n_su_values;
        if (n_su_values.empty()) n_su_values.push_back(cf.experiment.scenario.n_su);
        const auto methods = parse_methods(method_names, cs::parse_mode(g.mode));
        for (int n_su : n_su_values) {
            auto ex = hs::apply_sweep_value(cf.experiment, "n_su", n_su);
            ex.train.seed = seed;
            ex.svm.seed = seed;
            const auto train_set = cs::generate_segment(ex.scenario, cs::SensingMode::kSoft, seed, 0, ex.n_train);
            const auto eval_set =
                cs::generate_segment(ex.scenario, cs::SensingMode::kSoft, seed, ex.n_train, ex.n_eval);
            const auto fitted = hs::fit_methods(train_set, methods, ex);
            const auto part = hs::bench_latency(fitted, eval_set, n_warmup, n_iters);
            report.rows.insert(report.rows.end(), part.rows.begin(), part.rows.end());
        }
    }
    if (g.out.empty()) {
        hs::write_latency_csv(report, std::cout);
    } else {
        auto f = open_out(g.out);
        hs::write_latency_csv(report, f);
    }
    std::cerr << "kernels: " << cs::simd::isa_name(cs::simd::active_isa()) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative spectrum sensing simulator with CNN fusion"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "JSON config file");
    app.add_option("--seed", g.seed, "64-bit seed (default: scenario.seed)");
    app.add_option("--mode", g.mode, "report type: sd or hd")->check(CLI::IsMember({"sd", "hd", "SD", "HD"}));
    app.add_option("--out", g.out, "output path");

    auto* gen = app.add_subcommand("generate", "simulate a labeled dataset (JSONL)")->fallthrough();
    std::optional<std::size_t> samples;
    std::uint64_t first = 0;
    gen->add_option("--samples", samples, "number of snapshots (default: experiment.n_train)");
    gen->add_option("--first", first, "index of the first snapshot on the trajectory");

    auto* train = app.add_subcommand("train", "fit DCS and the baselines, write a checkpoint")->fallthrough();
    std::string train_data;
    std::vector<std::string> train_methods;
    train->add_option("--data", train_data, "training dataset (default: simulate experiment.n_train)");
    train->add_option("--methods", train_methods, "DCS-SD DCS-HD KON SVM-SD SVM-HD")->delimiter(',');

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint")->fallthrough();
    std::string eval_model;
    std::string eval_data;
    eval->add_option("--model", eval_model, "checkpoint from 'train'")->required();
    eval->add_option("--data", eval_data, "evaluation dataset (default: simulate experiment.n_eval)");

    auto* sweep = app.add_subcommand("sweep", "run the configured parameter sweep, write CSV")->fallthrough();
    std::optional<int> threads;
    bool plot = false;
    sweep->add_option("--threads", threads, "worker threads");
    sweep->add_flag("--plot", plot, "also write a gnuplot script next to the CSV");

    auto* bench = app.add_subcommand("bench", "per-decision latency, write CSV")->fallthrough();
    std::string bench_model;
    std::optional<int> iters;
    std::optional<int> warmup;
    std::vector<std::string> bench_methods;
    bench->add_option("--model", bench_model, "checkpoint to time (default: train per bench.n_su)");
    bench->add_option("--iters", iters, "timed calls per method");
    bench->add_option("--warmup", warmup, "untimed calls per method");
    bench->add_option("--methods", bench_methods, "methods to train when no --model is given")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (*gen) return cmd_generate(g, samples, first);
        if (*train) return cmd_train(g, train_data, train_methods);
        if (*eval) return cmd_eval(g, eval_model, eval_data);
        if (*sweep) return cmd_sweep(g, threads, plot);
        if (*bench) return cmd_bench(g, bench_model, iters, warmup, bench_methods);
    } catch (const CLI::RequiredError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
