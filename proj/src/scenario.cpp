#include "coopsense/scenario.hpp"

#include <functional>
#include <map>
#include <stdexcept>
#include <string>

namespace coopsense {

ScenarioConfig::ScenarioConfig() : path_loss_constant(std::pow(10.0, 3.453)) {}

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid scenario: ") + what);
}

}  // namespace

void ScenarioConfig::validate() const {
    require(std::isfinite(area_side_m) && area_side_m > 0, "area_side_m must be > 0");
    require(n_su >= 1, "n_su must be >= 1");
    require(n_bands >= 1, "n_bands must be >= 1");
    require(std::isfinite(band_width_hz) && band_width_hz > 0, "band_width_hz must be > 0");
    require(n_bp_min >= 1 && n_bp_min <= n_bp_max && n_bp_max <= n_bands,
            "need 1 <= n_bp_min <= n_bp_max <= n_bands");
    require(std::isfinite(pu_power_dbm), "pu_power_dbm must be finite");
    require(!std::isnan(leakage_db) && leakage_db != INFINITY, "leakage_db must be finite or -inf");
    require(std::isfinite(noise_psd_dbm_hz), "noise_psd_dbm_hz must be finite");
    require(std::isfinite(path_loss_exponent) && path_loss_exponent >= 0,
            "path_loss_exponent must be >= 0");
    require(std::isfinite(path_loss_constant) && path_loss_constant > 0,
            "path_loss_constant must be > 0");
    require(std::isfinite(shadow_sigma_db) && shadow_sigma_db >= 0, "shadow_sigma_db must be >= 0");
    require(std::isfinite(d_ref_m) && d_ref_m > 0, "d_ref_m must be > 0");
    require(std::isfinite(velocity_mps) && velocity_mps >= 0, "velocity_mps must be >= 0");
    require(std::isfinite(sensing_period_s) && sensing_period_s >= 0,
            "sensing_period_s must be >= 0");
    require(n_ed >= 1, "n_ed must be >= 1");
    require(!std::isnan(gamma_dbm), "gamma_dbm must not be NaN");
    require(!gamma_noise_offset_db || std::isfinite(*gamma_noise_offset_db),
            "gamma_noise_offset_db must be finite");
    require(pu_active_prob >= 0 && pu_active_prob <= 1, "pu_active_prob must be in [0,1]");
    require(std::isfinite(heading_jitter_deg) && heading_jitter_deg >= 0,
            "heading_jitter_deg must be >= 0");
}

double ScenarioConfig::effective_gamma_dbm() const {
    if (gamma_noise_offset_db) return noise_power_dbm() + *gamma_noise_offset_db;
    return gamma_dbm;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("scenario must be a JSON object");
    ScenarioConfig cfg;
    using Setter = std::function<void(const nlohmann::json&)>;
    const std::map<std::string, Setter> setters = {
        {"area_side_m", [&](const auto& v) { cfg.area_side_m = v.template get<double>(); }},
        {"n_su", [&](const auto& v) { cfg.n_su = v.template get<int>(); }},
        {"n_bands", [&](const auto& v) { cfg.n_bands = v.template get<int>(); }},
        {"band_width_hz", [&](const auto& v) { cfg.band_width_hz = v.template get<double>(); }},
        {"n_bp_min", [&](const auto& v) { cfg.n_bp_min = v.template get<int>(); }},
        {"n_bp_max", [&](const auto& v) { cfg.n_bp_max = v.template get<int>(); }},
        {"pu_power_dbm", [&](const auto& v) { cfg.pu_power_dbm = v.template get<double>(); }},
        {"leakage_db",
         [&](const auto& v) { cfg.leakage_db = v.is_null() ? -INFINITY : v.template get<double>(); }},
        {"noise_psd_dbm_hz", [&](const auto& v) { cfg.noise_psd_dbm_hz = v.template get<double>(); }},
        {"path_loss_exponent", [&](const auto& v) { cfg.path_loss_exponent = v.template get<double>(); }},
        {"path_loss_constant", [&](const auto& v) { cfg.path_loss_constant = v.template get<double>(); }},
        {"path_loss_constant_db",
         [&](const auto& v) { cfg.path_loss_constant = db_to_linear(v.template get<double>()); }},
        {"shadow_sigma_db", [&](const auto& v) { cfg.shadow_sigma_db = v.template get<double>(); }},
        {"d_ref_m", [&](const auto& v) { cfg.d_ref_m = v.template get<double>(); }},
        {"velocity_mps", [&](const auto& v) { cfg.velocity_mps = v.template get<double>(); }},
        {"velocity_kmh", [&](const auto& v) { cfg.velocity_mps = v.template get<double>() / 3.6; }},
        {"sensing_period_s", [&](const auto& v) { cfg.sensing_period_s = v.template get<double>(); }},
        {"n_ed", [&](const auto& v) { cfg.n_ed = v.template get<int>(); }},
        {"gamma_dbm", [&](const auto& v) { cfg.gamma_dbm = v.template get<double>(); }},
        {"gamma_noise_offset_db",
         [&](const auto& v) {
             if (v.is_null()) cfg.gamma_noise_offset_db.reset();
             else cfg.gamma_noise_offset_db = v.template get<double>();
         }},
        {"pu_active_prob", [&](const auto& v) { cfg.pu_active_prob = v.template get<double>(); }},
        {"heading_jitter_deg", [&](const auto& v) { cfg.heading_jitter_deg = v.template get<double>(); }},
        {"multipath_per_sample", [&](const auto& v) { cfg.multipath_per_sample = v.template get<bool>(); }},
        {"redeploy_each_snapshot",
         [&](const auto& v) { cfg.redeploy_each_snapshot = v.template get<bool>(); }},
        {"seed", [&](const auto& v) { cfg.seed = v.template get<std::uint64_t>(); }},
    };
    for (const auto& [key, value] : j.items()) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw std::invalid_argument("unknown scenario key: " + key);
        try {
            it->second(value);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("bad value for scenario key '" + key + "': " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

nlohmann::ordered_json scenario_to_json(const ScenarioConfig& cfg) {
    nlohmann::ordered_json j;
    j["area_side_m"] = cfg.area_side_m;
    j["n_su"] = cfg.n_su;
    j["n_bands"] = cfg.n_bands;
    j["band_width_hz"] = cfg.band_width_hz;
    j["n_bp_min"] = cfg.n_bp_min;
    j["n_bp_max"] = cfg.n_bp_max;
    j["pu_power_dbm"] = cfg.pu_power_dbm;
    // JSON has no -inf; null means leakage disabled.
    if (std::isinf(cfg.leakage_db)) j["leakage_db"] = nullptr;
    else j["leakage_db"] = cfg.leakage_db;
    j["noise_psd_dbm_hz"] = cfg.noise_psd_dbm_hz;
    j["path_loss_exponent"] = cfg.path_loss_exponent;
    j["path_loss_constant"] = cfg.path_loss_constant;
    j["shadow_sigma_db"] = cfg.shadow_sigma_db;
    j["d_ref_m"] = cfg.d_ref_m;
    j["velocity_mps"] = cfg.velocity_mps;
    j["sensing_period_s"] = cfg.sensing_period_s;
    j["n_ed"] = cfg.n_ed;
    j["gamma_dbm"] = cfg.gamma_dbm;
    if (cfg.gamma_noise_offset_db) j["gamma_noise_offset_db"] = *cfg.gamma_noise_offset_db;
    else j["gamma_noise_offset_db"] = nullptr;
    j["pu_active_prob"] = cfg.pu_active_prob;
    j["heading_jitter_deg"] = cfg.heading_jitter_deg;
    j["multipath_per_sample"] = cfg.multipath_per_sample;
    j["redeploy_each_snapshot"] = cfg.redeploy_each_snapshot;
    j["seed"] = cfg.seed;
    return j;
}

}  // namespace coopsense
