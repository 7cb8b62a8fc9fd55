// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration. JSON keys mirror the field names one-to-one;
// unknown keys are rejected when parsing.

#ifndef VSLICE_CONFIG_HPP
#define VSLICE_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "vslice/common.hpp"

namespace vslice {

struct ScenarioConfig {
    double bandwidth_hz = 10e6;
    int num_rb = 50;
    double tti_s = 1e-3;
    double carrier_hz = 5.9e9;
    double tx_power_dbm = 30.0;
    int n_tx = 64;
    int n_rx = 8;
    double rate_target_urllc_bps = 128e3;
    double rate_target_embb_bps = 1000e3;
    double epsilon = 0.01;
    double speed_kmh = 40.0;
    int num_rsu = 2;
    int num_urllc = 4;
    int num_embb = 4;
    double inter_vehicle_distance_m = 50.0;
    int num_scatterers = 8;
    int horizon = 1;
    std::uint64_t seed = 1;
    CsiMode mode = CsiMode::perfect;

    // Layout.
    double rsu_lateral_offset_m = 10.0;
    double scatterer_band_near_m = 15.0;
    double scatterer_band_far_m = 40.0;
    // Receiver.
    double noise_figure_db = 9.0;
    // Link abstraction.
    int modulation_order_bits = 4;
    double mi_threshold_bits = 3.0;
    double bler_slope = 10.0;
    int max_retx = 3;
    // Angular CSI quantizer.
    int quantizer_levels = 16;
    double quantizer_range_db = 40.0;
    // Scheduler.
    double urllc_rate_margin = 0.05;

    double rb_width_hz() const { return bandwidth_hz / num_rb; }
    int num_vehicles() const { return num_urllc + num_embb; }
    double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
    double speed_mps() const { return speed_kmh / 3.6; }
    double road_length_m() const { return num_vehicles() * inter_vehicle_distance_m; }
    double tx_power_w() const { return std::pow(10.0, tx_power_dbm / 10.0) * 1e-3; }
    double power_per_rb_w() const { return tx_power_w() / num_rb; }

    /// Throws ConfigError on the first violated invariant.
    void validate() const;
};

void to_json(nlohmann::json& j, const ScenarioConfig& c);
/// Strict: unknown keys and type mismatches raise ConfigError.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Parse a JSON document from a file, wrapping parse failures in ConfigError.
nlohmann::json read_json_file(const std::filesystem::path& path);

} // namespace vslice

#endif
