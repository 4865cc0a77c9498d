#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "json.hpp"

namespace coopsense {

// Power helpers. Everything inside the simulator is linear watts.
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

struct ScenarioConfig {
    double area_side_m = 200.0;
    int n_su = 32;
    int n_bands = 16;
    double band_width_hz = 10e6;
    int n_bp_min = 1;
    int n_bp_max = 3;
    double pu_power_dbm = 23.0;
    double leakage_db = -20.0;  // -inf disables leakage
    double noise_psd_dbm_hz = -174.0;
    double path_loss_exponent = 3.8;
    double path_loss_constant = 2838.0;  // overwritten below with 10^3.453
    double shadow_sigma_db = 7.9;        // standard deviation
    double d_ref_m = 50.0;
    double velocity_mps = 3000.0 / 3600.0;
    double sensing_period_s = 2.0;
    int n_ed = 64;
    double gamma_dbm = -107.0;
    // When set, the HD threshold tracks the noise floor: gamma = N0*W + offset.
    std::optional<double> gamma_noise_offset_db;
    double pu_active_prob = 0.5;
    double heading_jitter_deg = 15.0;
    bool multipath_per_sample = true;
    bool redeploy_each_snapshot = false;
    std::uint64_t seed = 42;

    ScenarioConfig();

    // Throws std::invalid_argument naming the first violated constraint.
    void validate() const;

    double noise_power_w() const { return dbm_to_watt(noise_psd_dbm_hz) * band_width_hz; }
    double noise_power_dbm() const { return noise_psd_dbm_hz + 10.0 * std::log10(band_width_hz); }
    double pu_power_w() const { return dbm_to_watt(pu_power_dbm); }
    double leakage_linear() const { return std::isinf(leakage_db) && leakage_db < 0 ? 0.0 : db_to_linear(leakage_db); }
    double step_distance_m() const { return velocity_mps * sensing_period_s; }
    // Threshold actually applied by hard decisions.
    double effective_gamma_dbm() const;
};

// Missing keys keep their defaults; unknown keys are rejected.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json scenario_to_json(const ScenarioConfig& cfg);

}  // namespace coopsense
