#include "coopsense/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace coopsense {

std::size_t Dataset::count(Hypothesis h) const {
    std::size_t n = 0;
    for (const auto& s : samples) n += s.label == h ? 1 : 0;
    return n;
}

Dataset generate_segment(const ScenarioConfig& cfg, SensingMode mode, std::uint64_t seed,
                         std::uint64_t first_snapshot, std::size_t count) {
    cfg.validate();
    Dataset ds;
    ds.scenario = cfg;
    ds.scenario.seed = seed;
    ds.mode = mode;
    ds.samples.reserve(count);

    auto topo_rng = make_stream(seed, StreamTag::kTopology);
    Topology topo = init_topology(cfg, topo_rng);
    const double gamma = cfg.effective_gamma_dbm();
    const std::uint64_t end = first_snapshot + count;
    for (std::uint64_t s = 0; s < end; ++s) {
        if (cfg.redeploy_each_snapshot) {
            auto rng = make_stream(seed, StreamTag::kTopology, s + 1);
            topo = init_topology(cfg, rng);
        } else {
            auto rng = make_stream(seed, StreamTag::kMobility, s);
            topo = step_mobility(topo, cfg, rng);
        }
        if (s < first_snapshot) continue;

        auto rng = make_stream(seed, StreamTag::kSnapshot, s);
        const PuState pu = sample_pu_state(cfg, rng);
        const ShadowField shadow = sample_shadow_field(topo.su_positions, cfg, rng);
        SensingMatrix m = sense_snapshot(topo, pu, shadow, cfg, rng);
        if (mode == SensingMode::kHard) m = hard_decision(m, gamma);
        ds.samples.push_back(
            {std::move(m), pu.active ? Hypothesis::kPresent : Hypothesis::kAbsent, s});
    }
    return ds;
}

Dataset to_hard_decision(const Dataset& soft, double gamma_dbm) {
    Dataset hd;
    hd.scenario = soft.scenario;
    hd.mode = SensingMode::kHard;
    hd.samples.reserve(soft.samples.size());
    for (const auto& s : soft.samples) {
        hd.samples.push_back({hard_decision(s.matrix, gamma_dbm), s.label, s.snapshot_index});
    }
    return hd;
}

Dataset to_hard_decision(const Dataset& soft) {
    return to_hard_decision(soft, soft.scenario.effective_gamma_dbm());
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double val_fraction, RngStream& rng) {
    std::vector<std::size_t> val_idx;
    for (Hypothesis h : {Hypothesis::kAbsent, Hypothesis::kPresent}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < ds.samples.size(); ++i) {
            if (ds.samples[i].label == h) idx.push_back(i);
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        auto take = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(idx.size())));
        if (take == 0 && idx.size() >= 2) take = 1;
        if (take == idx.size() && take > 0) --take;
        val_idx.insert(val_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
    }
    std::sort(val_idx.begin(), val_idx.end());
    Dataset fit{ds.scenario, ds.mode, {}};
    Dataset val{ds.scenario, ds.mode, {}};
    std::size_t v = 0;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        if (v < val_idx.size() && val_idx[v] == i) {
            val.samples.push_back(ds.samples[i]);
            ++v;
        } else {
            fit.samples.push_back(ds.samples[i]);
        }
    }
    if (fit.samples.empty() || val.samples.empty()) {
        throw std::invalid_argument("stratified_split: dataset too small to split");
    }
    return {std::move(fit), std::move(val)};
}

Standardizer fit_standardizer(const Dataset& train) {
    if (train.samples.empty()) throw std::invalid_argument("fit_standardizer: empty dataset");
    if (train.mode == SensingMode::kHard) return {};
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : train.samples) {
        for (double v : s.matrix.values) {
            const double db = watt_to_dbm(v);
            sum += db;
            ++n;
        }
    }
    const double mean = sum / static_cast<double>(n);
    // Second pass for the variance; the one-pass form cancels badly at ~-100 dBm.
    double var = 0.0;
    for (const auto& s : train.samples) {
        for (double v : s.matrix.values) {
            const double d = watt_to_dbm(v) - mean;
            var += d * d;
        }
    }
    var /= static_cast<double>(n);
    if (!(var > 0.0) || !std::isfinite(var)) {
        throw std::invalid_argument("fit_standardizer: training data has zero variance");
    }
    return {Standardizer::Domain::kDbScale, mean, std::sqrt(var)};
}

std::vector<double> apply_standardizer(const Standardizer& s, const SensingMatrix& m) {
    if (m.mode == SensingMode::kHard || s.domain == Standardizer::Domain::kIdentity) {
        return m.values;
    }
    std::vector<double> out(m.values.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = (watt_to_dbm(m.values[k]) - s.mean) / s.std;
    }
    return out;
}

nlohmann::ordered_json standardizer_to_json(const Standardizer& s) {
    nlohmann::ordered_json j;
    j["domain"] = s.domain == Standardizer::Domain::kDbScale ? "db_scale" : "identity";
    j["mean"] = s.mean;
    j["std"] = s.std;
    return j;
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
    Standardizer s;
    const auto domain = j.at("domain").get<std::string>();
    if (domain == "db_scale") s.domain = Standardizer::Domain::kDbScale;
    else if (domain == "identity") s.domain = Standardizer::Domain::kIdentity;
    else throw std::invalid_argument("unknown standardizer domain '" + domain + "'");
    s.mean = j.at("mean").get<double>();
    s.std = j.at("std").get<double>();
    if (!(s.std > 0.0)) throw std::invalid_argument("standardizer std must be > 0");
    return s;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    nlohmann::ordered_json header;
    header["version"] = kDatasetFormatVersion;
    header["scenario"] = scenario_to_json(ds.scenario);
    header["mode"] = std::string(mode_name(ds.mode));
    header["n_su"] = ds.n_su();
    header["n_bands"] = ds.n_bands();
    header["n_samples"] = ds.samples.size();
    out << header.dump() << '\n';
    for (const auto& s : ds.samples) {
        nlohmann::ordered_json rec;
        rec["idx"] = s.snapshot_index;
        rec["label"] = static_cast<int>(s.label);
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < s.matrix.n_su; ++i) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (std::size_t j = 0; j < s.matrix.n_bands; ++j) row.push_back(s.matrix.at(i, j));
            rows.push_back(std::move(row));
        }
        rec["rows"] = std::move(rows);
        out << rec.dump() << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

namespace {

nlohmann::json parse_line(const std::string& text, std::size_t line) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DatasetParseError(std::string("malformed record: ") + e.what(), line);
    }
}

template <typename T>
T field(const nlohmann::json& j, const char* key, std::size_t line) {
    if (!j.is_object() || !j.contains(key)) {
        throw DatasetParseError(std::string("missing field '") + key + "'", line);
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw DatasetParseError(std::string("bad field '") + key + "': " + e.what(), line);
    }
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset '" + path.string() + "'");

    std::string text;
    std::size_t line = 1;
    if (!std::getline(in, text)) throw DatasetParseError("empty file, missing header", line);
    const auto header = parse_line(text, line);
    const int version = field<int>(header, "version", line);
    if (version != kDatasetFormatVersion) {
        throw DatasetParseError("unsupported dataset format version " + std::to_string(version) +
                                    " (expected " + std::to_string(kDatasetFormatVersion) + ")",
                                line);
    }
    Dataset ds;
    try {
        ds.scenario = scenario_from_json(header.at("scenario"));
        ds.mode = parse_mode(field<std::string>(header, "mode", line));
    } catch (const DatasetParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw DatasetParseError(e.what(), line);
    }
    const auto n_su = field<std::size_t>(header, "n_su", line);
    const auto n_bands = field<std::size_t>(header, "n_bands", line);
    const auto n_samples = field<std::size_t>(header, "n_samples", line);
    if (n_su != ds.n_su() || n_bands != ds.n_bands()) {
        throw DatasetParseError("header dimensions disagree with scenario", line);
    }
    ds.samples.reserve(n_samples);

    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        const auto rec = parse_line(text, line);
        LabeledSample s;
        s.snapshot_index = field<std::uint64_t>(rec, "idx", line);
        const int label = field<int>(rec, "label", line);
        if (label != 0 && label != 1) throw DatasetParseError("label must be 0 or 1", line);
        s.label = static_cast<Hypothesis>(label);
        if (!ds.samples.empty() && s.snapshot_index <= ds.samples.back().snapshot_index) {
            throw DatasetParseError("snapshot indices must be strictly increasing", line);
        }
        const auto rows = field<std::vector<std::vector<double>>>(rec, "rows", line);
        if (rows.size() != n_su) throw DatasetParseError("wrong number of rows", line);
        s.matrix = SensingMatrix(ds.mode, n_su, n_bands);
        for (std::size_t i = 0; i < n_su; ++i) {
            if (rows[i].size() != n_bands) throw DatasetParseError("wrong row length", line);
            for (std::size_t j = 0; j < n_bands; ++j) {
                const double v = rows[i][j];
                const bool ok = ds.mode == SensingMode::kSoft ? (std::isfinite(v) && v > 0.0)
                                                              : (v == 0.0 || v == 1.0);
                if (!ok) {
                    std::ostringstream msg;
                    msg << "invalid " << mode_name(ds.mode) << " value " << v << " at row " << i
                        << ", band " << j;
                    throw DatasetParseError(msg.str(), line);
                }
                s.matrix.at(i, j) = v;
            }
        }
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.size() != n_samples) {
        throw DatasetParseError("truncated dataset: header declares " + std::to_string(n_samples) +
                                    " samples, found " + std::to_string(ds.samples.size()),
                                line);
    }
    return ds;
}

}  // namespace coopsense
