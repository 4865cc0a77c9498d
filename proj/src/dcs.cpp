#include "coopsense/dcs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace coopsense::dcs {
namespace {

struct Cache {
    std::vector<nn::Tensor> block_in;
    std::vector<nn::Tensor> conv_out;
    std::vector<nn::Tensor> relu_out;
    std::vector<std::vector<std::int64_t>> argmax;
    std::vector<double> flat;
    std::vector<double> h1;
    std::vector<double> a1;
    std::vector<double> h2;
    ForwardResult result;
};

void run_forward(const CnnModel& m, std::span<const double> input, Cache& c) {
    if (input.size() != m.n_su * m.n_bands) {
        throw std::invalid_argument("forward: input has " + std::to_string(input.size()) +
                                    " values, model expects " +
                                    std::to_string(m.n_su * m.n_bands));
    }
    const std::size_t blocks = m.weights.convs.size();
    c.block_in.resize(blocks);
    c.conv_out.resize(blocks);
    c.relu_out.resize(blocks);
    c.argmax.resize(blocks);

    nn::Tensor x(m.n_su, m.n_bands, 1);
    std::copy(input.begin(), input.end(), x.data.begin());
    for (std::size_t b = 0; b < blocks; ++b) {
        c.block_in[b] = std::move(x);
        c.conv_out[b] = nn::conv3x3_forward(c.block_in[b], m.weights.convs[b]);
        c.relu_out[b] = nn::relu_forward(c.conv_out[b]);
        auto pooled = nn::maxpool2x2_forward(c.relu_out[b]);
        c.argmax[b] = std::move(pooled.argmax);
        x = std::move(pooled.out);
    }
    c.flat = std::move(x.data);
    c.h1 = nn::fc_forward(c.flat, m.weights.fc1);
    c.a1.resize(c.h1.size());
    for (std::size_t i = 0; i < c.h1.size(); ++i) c.a1[i] = c.h1[i] > 0.0 ? c.h1[i] : 0.0;
    c.h2 = nn::fc_forward(c.a1, m.weights.fc2);
    c.result.logits = nn::softmax_logits(c.h2, m.weights.softmax);
    c.result.probs = nn::softmax_probs(c.result.logits);
    c.result.decision = decide(c.result.probs);
}

void backward(const CnnModel& m, const Cache& c, int label, Weights& g) {
    const auto dz = nn::cross_entropy_grad(c.result.probs, label);
    const auto g_h2 = nn::softmax_backward_acc(c.h2, m.weights.softmax, dz, g.softmax);
    const auto g_a1 = nn::fc_backward_acc(c.a1, m.weights.fc2, g_h2, g.fc2);
    std::vector<double> g_h1(g_a1.size());
    for (std::size_t i = 0; i < g_h1.size(); ++i) g_h1[i] = c.h1[i] > 0.0 ? g_a1[i] : 0.0;
    auto g_flat = nn::fc_backward_acc(c.flat, m.weights.fc1, g_h1, g.fc1);

    const std::size_t blocks = m.weights.convs.size();
    const auto& last = c.relu_out[blocks - 1];
    nn::Tensor grad((last.h + 1) / 2, (last.w + 1) / 2, last.c);
    grad.data = std::move(g_flat);
    for (std::size_t b = blocks; b-- > 0;) {
        const auto& r = c.relu_out[b];
        const auto g_relu = nn::maxpool2x2_backward(c.argmax[b], r.h, r.w, r.c, grad);
        const auto g_conv = nn::relu_backward(c.conv_out[b], g_relu);
        grad = nn::conv3x3_backward_acc(c.block_in[b], m.weights.convs[b], g_conv, g.convs[b], b > 0);
    }
}

double accuracy_of(std::size_t correct, std::size_t total) {
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

std::vector<std::size_t> identity_permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    return p;
}

}  // namespace

void ArchConfig::validate() const {
    if (n_conv_blocks < 1) throw std::invalid_argument("arch: n_conv_blocks must be >= 1");
    if (conv_depths.size() != static_cast<std::size_t>(n_conv_blocks)) {
        throw std::invalid_argument("arch: conv_depths must list one depth per conv block");
    }
    for (int d : conv_depths) {
        if (d < 1) throw std::invalid_argument("arch: conv depths must be >= 1");
    }
    if (fc_widths[0] < 1 || fc_widths[1] < 1) throw std::invalid_argument("arch: FC widths must be >= 1");
}

std::size_t Weights::count() const {
    std::size_t n = fc1.size() + fc2.size() + softmax.size();
    for (const auto& c : convs) n += c.size();
    return n;
}

std::vector<double> Weights::flatten() const {
    std::vector<double> flat;
    flat.reserve(count());
    auto put = [&](const std::vector<double>& v) { flat.insert(flat.end(), v.begin(), v.end()); };
    for (const auto& c : convs) {
        put(c.weights);
        put(c.bias);
    }
    put(fc1.weights);
    put(fc1.bias);
    put(fc2.weights);
    put(fc2.bias);
    put(softmax.weights);
    return flat;
}

void Weights::assign(std::span<const double> flat) {
    if (flat.size() != count()) {
        throw std::invalid_argument("parameter vector has " + std::to_string(flat.size()) +
                                    " values, model has " + std::to_string(count()));
    }
    std::size_t pos = 0;
    auto take = [&](std::vector<double>& v) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), v.size(), v.begin());
        pos += v.size();
    };
    for (auto& c : convs) {
        take(c.weights);
        take(c.bias);
    }
    take(fc1.weights);
    take(fc1.bias);
    take(fc2.weights);
    take(fc2.bias);
    take(softmax.weights);
}

Weights Weights::zeros_like() const {
    Weights z;
    for (const auto& c : convs) z.convs.emplace_back(c.in_ch, c.out_ch);
    z.fc1 = nn::FcParams(fc1.in, fc1.out);
    z.fc2 = nn::FcParams(fc2.in, fc2.out);
    z.softmax = nn::SoftmaxParams(softmax.in);
    return z;
}

std::vector<std::array<std::size_t, 2>> spatial_chain(const ArchConfig& arch, std::size_t n_su,
                                                      std::size_t n_bands) {
    arch.validate();
    if (n_su < 2 || n_bands < 2) {
        throw std::invalid_argument("input must be at least 2x2, got " + std::to_string(n_su) +
                                    "x" + std::to_string(n_bands));
    }
    std::vector<std::array<std::size_t, 2>> chain;
    std::size_t h = n_su;
    std::size_t w = n_bands;
    for (int b = 0; b < arch.n_conv_blocks; ++b) {
        if (h < 2 || w < 2) {
            throw std::invalid_argument("spatial size collapses before conv block " +
                                        std::to_string(b + 1) + " (" + std::to_string(h) + "x" +
                                        std::to_string(w) + ")");
        }
        chain.push_back({h, w});
        h = (h + 1) / 2;
        w = (w + 1) / 2;
    }
    chain.push_back({h, w});
    return chain;
}

CnnModel build_model(const ArchConfig& arch, std::size_t n_su, std::size_t n_bands, RngStream& rng) {
    const auto chain = spatial_chain(arch, n_su, n_bands);
    CnnModel m;
    m.arch = arch;
    m.n_su = n_su;
    m.n_bands = n_bands;
    m.su_permutation = identity_permutation(n_su);
    std::size_t in_ch = 1;
    for (int depth : arch.conv_depths) {
        nn::ConvParams p(in_ch, static_cast<std::size_t>(depth));
        nn::init_conv(p, rng);
        m.weights.convs.push_back(std::move(p));
        in_ch = static_cast<std::size_t>(depth);
    }
    const auto& out = chain.back();
    const std::size_t flat = out[0] * out[1] * in_ch;
    m.weights.fc1 = nn::FcParams(flat, static_cast<std::size_t>(arch.fc_widths[0]));
    m.weights.fc2 = nn::FcParams(static_cast<std::size_t>(arch.fc_widths[0]),
                                 static_cast<std::size_t>(arch.fc_widths[1]));
    m.weights.softmax = nn::SoftmaxParams(static_cast<std::size_t>(arch.fc_widths[1]));
    nn::init_fc(m.weights.fc1, rng);
    nn::init_fc(m.weights.fc2, rng);
    nn::init_softmax(m.weights.softmax, rng);
    return m;
}

std::size_t count_parameters(const CnnModel& model) { return model.weights.count(); }

std::uint64_t permutation_hash(const std::vector<std::size_t>& perm) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t v : perm) {
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (static_cast<std::uint64_t>(v) >> (8 * byte)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

bool is_permutation(const std::vector<std::size_t>& perm, std::size_t n) {
    if (perm.size() != n) return false;
    std::vector<bool> seen(n, false);
    for (std::size_t v : perm) {
        if (v >= n || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

std::vector<double> prepare_input(const CnnModel& model, const SensingMatrix& raw) {
    if (raw.mode != model.mode) {
        throw std::invalid_argument("model expects " + std::string(mode_name(model.mode)) +
                                    " input, got " + std::string(mode_name(raw.mode)));
    }
    if (raw.n_su != model.n_su || raw.n_bands != model.n_bands) {
        throw std::invalid_argument("input matrix is " + std::to_string(raw.n_su) + "x" +
                                    std::to_string(raw.n_bands) + ", model expects " +
                                    std::to_string(model.n_su) + "x" + std::to_string(model.n_bands));
    }
    const auto scaled = apply_standardizer(model.standardizer, raw);
    std::vector<double> out(scaled.size());
    for (std::size_t r = 0; r < model.n_su; ++r) {
        const std::size_t src = model.su_permutation[r];
        std::copy_n(scaled.begin() + static_cast<std::ptrdiff_t>(src * model.n_bands), model.n_bands,
                    out.begin() + static_cast<std::ptrdiff_t>(r * model.n_bands));
    }
    return out;
}

Hypothesis decide(std::array<double, 2> probs) {
    return probs[0] > probs[1] ? Hypothesis::kAbsent : Hypothesis::kPresent;
}

ForwardResult forward(const CnnModel& model, std::span<const double> input) {
    Cache c;
    run_forward(model, input, c);
    return c.result;
}

double accumulate_gradients(const CnnModel& model, std::span<const double> input, int label,
                            Weights& grads, ForwardResult* result) {
    Cache c;
    run_forward(model, input, c);
    backward(model, c, label, grads);
    if (result) *result = c.result;
    return nn::cross_entropy(c.result.probs, label);
}

Hypothesis predict(const CnnModel& model, const SensingMatrix& raw) {
    return forward(model, prepare_input(model, raw)).decision;
}

std::vector<Hypothesis> predict_batch(const CnnModel& model, const std::vector<SensingMatrix>& raw) {
    std::vector<Hypothesis> out;
    out.reserve(raw.size());
    for (const auto& m : raw) out.push_back(predict(model, m));
    return out;
}

void TrainConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (!(lr > 0)) throw std::invalid_argument("train: lr must be > 0");
    if (n_permutations < 1) throw std::invalid_argument("train: n_permutations must be >= 1");
    if (!(validation_fraction > 0 && validation_fraction < 1)) {
        throw std::invalid_argument("train: validation_fraction must be in (0, 1)");
    }
    if (patience < 1) throw std::invalid_argument("train: patience must be >= 1");
}

TrainResult train(const CnnModel& model, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& tc) {
    tc.validate();
    if (train_set.samples.empty() || val_set.samples.empty()) {
        throw std::invalid_argument("train: training and validation sets must be nonempty");
    }
    if (train_set.mode != val_set.mode || train_set.n_su() != val_set.n_su() ||
        train_set.n_bands() != val_set.n_bands()) {
        throw std::invalid_argument("train: training and validation sets differ in mode or shape");
    }

    struct Prepared {
        std::vector<std::vector<double>> x;
        std::vector<int> y;
    };
    auto prepare = [&](const Dataset& ds) {
        Prepared p;
        for (const auto& s : ds.samples) {
            p.x.push_back(prepare_input(model, s.matrix));
            p.y.push_back(static_cast<int>(s.label));
        }
        return p;
    };
    const Prepared tr = prepare(train_set);
    const Prepared va = prepare(val_set);

    TrainResult result{model, {}, 0.0, 0};
    CnnModel current = model;
    nn::AdamState adam;
    adam.lr = tc.lr;
    auto shuffle_rng = make_stream(tc.seed, StreamTag::kShuffle);
    std::vector<std::size_t> order(tr.x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    double best_acc = -1.0;
    double best_loss = INFINITY;
    int since_gain = 0;
    const std::size_t batch = static_cast<std::size_t>(tc.batch_size);

    for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(order.size(), start + batch);
            Weights grads = current.weights.zeros_like();
            for (std::size_t k = start; k < end; ++k) {
                const std::size_t idx = order[k];
                ForwardResult fr;
                const double loss = accumulate_gradients(current, tr.x[idx], tr.y[idx], grads, &fr);
                if (!std::isfinite(loss)) {
                    std::ostringstream msg;
                    msg << "train: non-finite loss at epoch " << epoch << ", sample " << idx
                        << " (logits " << fr.logits[0] << ", " << fr.logits[1] << ")";
                    throw std::runtime_error(msg.str());
                }
                loss_sum += loss;
                correct += static_cast<int>(fr.decision) == tr.y[idx] ? 1 : 0;
            }
            auto g = grads.flatten();
            const double scale = 1.0 / static_cast<double>(end - start);
            for (auto& v : g) v *= scale;
            auto params = current.weights.flatten();
            nn::adam_step(params, g, adam);
            current.weights.assign(params);
        }

        double val_loss = 0.0;
        std::size_t val_correct = 0;
        for (std::size_t i = 0; i < va.x.size(); ++i) {
            const auto fr = forward(current, va.x[i]);
            val_loss += nn::cross_entropy(fr.probs, va.y[i]);
            val_correct += static_cast<int>(fr.decision) == va.y[i] ? 1 : 0;
        }
        EpochStats st;
        st.epoch = epoch;
        st.train_loss = loss_sum / static_cast<double>(tr.x.size());
        st.train_accuracy = accuracy_of(correct, tr.x.size());
        st.val_loss = val_loss / static_cast<double>(va.x.size());
        st.val_accuracy = accuracy_of(val_correct, va.x.size());
        result.history.push_back(st);

        if (st.val_accuracy > best_acc) {
            best_acc = st.val_accuracy;
            best_loss = st.val_loss;
            since_gain = 0;
            result.model = current;
            result.best_epoch = epoch;
        } else {
            if (st.val_accuracy == best_acc && st.val_loss < best_loss) {
                best_loss = st.val_loss;
                result.model = current;
                result.best_epoch = epoch;
            }
            if (++since_gain >= tc.patience) break;
        }
    }
    result.best_val_accuracy = best_acc < 0 ? 0.0 : best_acc;
    return result;
}

EnsembleResult train_permutation_ensemble(const Dataset& train_set, const TrainConfig& tc,
                                          const ArchConfig& arch) {
    tc.validate();
    if (train_set.samples.empty()) throw std::invalid_argument("ensemble: empty training set");
    const Standardizer standardizer = fit_standardizer(train_set);
    auto split_rng = make_stream(tc.seed, StreamTag::kSplit);
    const auto [fit, val] = stratified_split(train_set, tc.validation_fraction, split_rng);

    EnsembleResult out;
    double best_acc = -1.0;
    for (int m = 0; m < tc.n_permutations; ++m) {
        const auto mu = static_cast<std::uint64_t>(m);
        auto perm = identity_permutation(train_set.n_su());
        if (m > 0) {
            auto perm_rng = make_stream(tc.seed, StreamTag::kPermutation, mu);
            std::shuffle(perm.begin(), perm.end(), perm_rng);
        }
        auto init_rng = make_stream(tc.seed, StreamTag::kInit, mu);
        CnnModel model = build_model(arch, train_set.n_su(), train_set.n_bands(), init_rng);
        model.mode = train_set.mode;
        model.standardizer = standardizer;
        model.su_permutation = perm;

        TrainConfig member = tc;
        member.seed = derive_seed(tc.seed, StreamTag::kShuffle, mu);
        TrainResult r = train(model, fit, val, member);
        if (r.best_val_accuracy > best_acc) {
            best_acc = r.best_val_accuracy;
            out.best_index = static_cast<std::size_t>(m);
        }
        out.candidates.push_back({std::move(perm), std::move(r)});
    }
    out.model = out.candidates[out.best_index].result.model;
    out.history = out.candidates[out.best_index].result.history;
    return out;
}

nlohmann::ordered_json arch_to_json(const ArchConfig& arch) {
    nlohmann::ordered_json j;
    j["n_conv_blocks"] = arch.n_conv_blocks;
    j["conv_depths"] = arch.conv_depths;
    j["fc_widths"] = arch.fc_widths;
    return j;
}

ArchConfig arch_from_json(const nlohmann::json& j) {
    ArchConfig a;
    for (const auto& [key, v] : j.items()) {
        if (key == "n_conv_blocks") a.n_conv_blocks = v.get<int>();
        else if (key == "conv_depths") a.conv_depths = v.get<std::vector<int>>();
        else if (key == "fc_widths") a.fc_widths = v.get<std::array<int, 2>>();
        else throw std::invalid_argument("unknown arch key: " + key);
    }
    if (j.contains("n_conv_blocks") && !j.contains("conv_depths")) {
        a.conv_depths.assign(static_cast<std::size_t>(std::max(a.n_conv_blocks, 0)), 8);
    }
    a.validate();
    return a;
}

nlohmann::ordered_json train_config_to_json(const TrainConfig& tc) {
    nlohmann::ordered_json j;
    j["epochs"] = tc.epochs;
    j["batch_size"] = tc.batch_size;
    j["lr"] = tc.lr;
    j["n_permutations"] = tc.n_permutations;
    j["validation_fraction"] = tc.validation_fraction;
    j["patience"] = tc.patience;
    j["seed"] = tc.seed;
    return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig tc;
    for (const auto& [key, v] : j.items()) {
        if (key == "epochs") tc.epochs = v.get<int>();
        else if (key == "batch_size") tc.batch_size = v.get<int>();
        else if (key == "lr") tc.lr = v.get<double>();
        else if (key == "n_permutations") tc.n_permutations = v.get<int>();
        else if (key == "validation_fraction") tc.validation_fraction = v.get<double>();
        else if (key == "patience") tc.patience = v.get<int>();
        else if (key == "seed") tc.seed = v.get<std::uint64_t>();
        else throw std::invalid_argument("unknown train key: " + key);
    }
    tc.validate();
    return tc;
}

nlohmann::ordered_json model_to_json(const CnnModel& model) {
    nlohmann::ordered_json j;
    j["arch"] = arch_to_json(model.arch);
    j["n_su"] = model.n_su;
    j["n_bands"] = model.n_bands;
    j["mode"] = std::string(mode_name(model.mode));
    j["su_permutation"] = model.su_permutation;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(permutation_hash(model.su_permutation)));
    j["permutation_hash"] = hash;
    j["standardizer"] = standardizer_to_json(model.standardizer);
    j["n_parameters"] = count_parameters(model);
    j["parameters"] = model.weights.flatten();
    return j;
}

CnnModel model_from_json(const nlohmann::json& j) {
    const ArchConfig arch = arch_from_json(j.at("arch"));
    const auto n_su = j.at("n_su").get<std::size_t>();
    const auto n_bands = j.at("n_bands").get<std::size_t>();
    RngStream unused(0);
    CnnModel m = build_model(arch, n_su, n_bands, unused);
    m.mode = parse_mode(j.at("mode").get<std::string>());
    m.su_permutation = j.at("su_permutation").get<std::vector<std::size_t>>();
    if (!is_permutation(m.su_permutation, n_su)) {
        throw std::invalid_argument("checkpoint: su_permutation is not a permutation of [0, n_su)");
    }
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(permutation_hash(m.su_permutation)));
    if (j.at("permutation_hash").get<std::string>() != hash) {
        throw std::invalid_argument("checkpoint: permutation hash mismatch");
    }
    m.standardizer = standardizer_from_json(j.at("standardizer"));
    m.weights.assign(j.at("parameters").get<std::vector<double>>());
    return m;
}

}  // namespace coopsense::dcs
