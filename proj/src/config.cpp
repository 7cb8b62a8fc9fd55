// SPDX-License-Identifier: Apache-2.0

#include "vslice/config.hpp"

#include <fstream>
#include <functional>
#include <map>

namespace vslice {

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok) throw ConfigError("invalid configuration: " + what);
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out)
{
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

} // namespace

void ScenarioConfig::validate() const
{
    require(bandwidth_hz > 0, "bandwidth_hz must be positive");
    require(num_rb > 0, "num_rb must be positive");
    require(tti_s > 0, "tti_s must be positive");
    require(carrier_hz > 0, "carrier_hz must be positive");
    require(n_tx >= 1 && n_rx >= 1, "antenna counts must be >= 1");
    require(rate_target_urllc_bps > 0 && rate_target_embb_bps > 0, "rate targets must be positive");
    require(epsilon > 0 && epsilon < 1, "epsilon must lie in (0, 1)");
    require(speed_kmh >= 0, "speed_kmh must be non-negative");
    require(num_rsu >= 1, "num_rsu must be >= 1");
    require(num_urllc >= 0 && num_embb >= 0, "vehicle counts must be non-negative");
    require(num_vehicles() > 0, "at least one vehicle is required");
    require(inter_vehicle_distance_m > 0, "inter_vehicle_distance_m must be positive");
    require(num_scatterers >= 0 && num_scatterers < 64, "num_scatterers must be in [0, 63]");
    require(horizon >= 1, "horizon must be >= 1");
    require(rsu_lateral_offset_m > 0, "rsu_lateral_offset_m must be positive");
    require(scatterer_band_near_m > 0 && scatterer_band_far_m >= scatterer_band_near_m,
            "scatterer band must satisfy 0 < near <= far");
    require(modulation_order_bits > 0, "modulation_order_bits must be positive");
    require(mi_threshold_bits > 0 && mi_threshold_bits < modulation_order_bits,
            "mi_threshold_bits must lie in (0, modulation_order_bits)");
    require(bler_slope > 0, "bler_slope must be positive");
    require(max_retx >= 0, "max_retx must be non-negative");
    require(quantizer_levels >= 2, "quantizer_levels must be >= 2");
    require(quantizer_range_db > 0, "quantizer_range_db must be positive");
    require(urllc_rate_margin >= 0, "urllc_rate_margin must be non-negative");
}

void to_json(nlohmann::json& j, const ScenarioConfig& c)
{
    j = nlohmann::json{
        {"bandwidth_hz", c.bandwidth_hz},
        {"num_rb", c.num_rb},
        {"tti_s", c.tti_s},
        {"carrier_hz", c.carrier_hz},
        {"tx_power_dbm", c.tx_power_dbm},
        {"n_tx", c.n_tx},
        {"n_rx", c.n_rx},
        {"rate_target_urllc_bps", c.rate_target_urllc_bps},
        {"rate_target_embb_bps", c.rate_target_embb_bps},
        {"epsilon", c.epsilon},
        {"speed_kmh", c.speed_kmh},
        {"num_rsu", c.num_rsu},
        {"num_urllc", c.num_urllc},
        {"num_embb", c.num_embb},
        {"inter_vehicle_distance_m", c.inter_vehicle_distance_m},
        {"num_scatterers", c.num_scatterers},
        {"horizon", c.horizon},
        {"seed", c.seed},
        {"mode", std::string(to_string(c.mode))},
        {"rsu_lateral_offset_m", c.rsu_lateral_offset_m},
        {"scatterer_band_near_m", c.scatterer_band_near_m},
        {"scatterer_band_far_m", c.scatterer_band_far_m},
        {"noise_figure_db", c.noise_figure_db},
        {"modulation_order_bits", c.modulation_order_bits},
        {"mi_threshold_bits", c.mi_threshold_bits},
        {"bler_slope", c.bler_slope},
        {"max_retx", c.max_retx},
        {"quantizer_levels", c.quantizer_levels},
        {"quantizer_range_db", c.quantizer_range_db},
        {"urllc_rate_margin", c.urllc_rate_margin},
    };
}

ScenarioConfig scenario_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) throw ConfigError("scenario configuration must be a JSON object");

    ScenarioConfig c;
    using Setter = std::function<void(const nlohmann::json&)>;
    const std::map<std::string, Setter> fields = {
        {"bandwidth_hz", [&](const auto& v) { read_field(v, "bandwidth_hz", c.bandwidth_hz); }},
        {"num_rb", [&](const auto& v) { read_field(v, "num_rb", c.num_rb); }},
        {"tti_s", [&](const auto& v) { read_field(v, "tti_s", c.tti_s); }},
        {"carrier_hz", [&](const auto& v) { read_field(v, "carrier_hz", c.carrier_hz); }},
        {"tx_power_dbm", [&](const auto& v) { read_field(v, "tx_power_dbm", c.tx_power_dbm); }},
        {"n_tx", [&](const auto& v) { read_field(v, "n_tx", c.n_tx); }},
        {"n_rx", [&](const auto& v) { read_field(v, "n_rx", c.n_rx); }},
        {"rate_target_urllc_bps", [&](const auto& v) { read_field(v, "rate_target_urllc_bps", c.rate_target_urllc_bps); }},
        {"rate_target_embb_bps", [&](const auto& v) { read_field(v, "rate_target_embb_bps", c.rate_target_embb_bps); }},
        {"epsilon", [&](const auto& v) { read_field(v, "epsilon", c.epsilon); }},
        {"speed_kmh", [&](const auto& v) { read_field(v, "speed_kmh", c.speed_kmh); }},
        {"num_rsu", [&](const auto& v) { read_field(v, "num_rsu", c.num_rsu); }},
        {"num_urllc", [&](const auto& v) { read_field(v, "num_urllc", c.num_urllc); }},
        {"num_embb", [&](const auto& v) { read_field(v, "num_embb", c.num_embb); }},
        {"inter_vehicle_distance_m", [&](const auto& v) { read_field(v, "inter_vehicle_distance_m", c.inter_vehicle_distance_m); }},
        {"num_scatterers", [&](const auto& v) { read_field(v, "num_scatterers", c.num_scatterers); }},
        {"horizon", [&](const auto& v) { read_field(v, "horizon", c.horizon); }},
        {"seed", [&](const auto& v) { read_field(v, "seed", c.seed); }},
        {"mode", [&](const auto& v) {
             std::string m;
             read_field(v, "mode", m);
             c.mode = parse_mode(m);
         }},
        {"rsu_lateral_offset_m", [&](const auto& v) { read_field(v, "rsu_lateral_offset_m", c.rsu_lateral_offset_m); }},
        {"scatterer_band_near_m", [&](const auto& v) { read_field(v, "scatterer_band_near_m", c.scatterer_band_near_m); }},
        {"scatterer_band_far_m", [&](const auto& v) { read_field(v, "scatterer_band_far_m", c.scatterer_band_far_m); }},
        {"noise_figure_db", [&](const auto& v) { read_field(v, "noise_figure_db", c.noise_figure_db); }},
        {"modulation_order_bits", [&](const auto& v) { read_field(v, "modulation_order_bits", c.modulation_order_bits); }},
        {"mi_threshold_bits", [&](const auto& v) { read_field(v, "mi_threshold_bits", c.mi_threshold_bits); }},
        {"bler_slope", [&](const auto& v) { read_field(v, "bler_slope", c.bler_slope); }},
        {"max_retx", [&](const auto& v) { read_field(v, "max_retx", c.max_retx); }},
        {"quantizer_levels", [&](const auto& v) { read_field(v, "quantizer_levels", c.quantizer_levels); }},
        {"quantizer_range_db", [&](const auto& v) { read_field(v, "quantizer_range_db", c.quantizer_range_db); }},
        {"urllc_rate_margin", [&](const auto& v) { read_field(v, "urllc_rate_margin", c.urllc_rate_margin); }},
    };

    for (const auto& [key, value] : j.items()) {
        auto it = fields.find(key);
        if (it == fields.end()) throw ConfigError("unknown configuration key '" + key + "'");
        it->second(j);
    }
    c.validate();
    return c;
}

nlohmann::json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

ScenarioConfig load_scenario(const std::filesystem::path& path)
{
    return scenario_from_json(read_json_file(path));
}

} // namespace vslice
