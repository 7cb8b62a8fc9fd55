// SPDX-License-Identifier: Apache-2.0

#include "vslice/scenario.hpp"

#include <limits>

namespace vslice {

double PathLossModel::loss_db(double d_km) const
{
    if (!(d_km > 0.0)) throw DomainError("path loss requires a positive distance");
    return intercept_db + slope_db_per_decade * std::log10(d_km);
}

Scenario build_scenario(const ScenarioConfig& config)
{
    config.validate();
    Rng rng(config.seed, "geometry");

    Scenario sc;
    auto& geo = sc.geometry;
    geo.road_length_m = config.road_length_m();

    for (int s = 0; s < config.num_rsu; ++s) {
        geo.rsu_positions_m.push_back(
            {(s + 0.5) * geo.road_length_m / config.num_rsu, config.rsu_lateral_offset_m});
    }

    for (int s = 0; s < config.num_scatterers; ++s) {
        const double x = rng.uniform(0.0, geo.road_length_m);
        const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double y = side * rng.uniform(config.scatterer_band_near_m, config.scatterer_band_far_m);
        geo.scatterer_positions_m.push_back({x, y});
        const double mag = rng.uniform(0.3, 0.8);
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        geo.reflection_coefficients.push_back(std::polar(mag, phase));
    }

    // Platoon starts at a random offset within one spacing; URLLC vehicles are
    // spread evenly among the eMBB ones.
    const int n = config.num_vehicles();
    const double offset = rng.uniform(0.0, config.inter_vehicle_distance_m);
    for (int i = 0; i < n; ++i) {
        VehicleState v;
        v.id = i;
        const long long before = static_cast<long long>(i) * config.num_urllc / n;
        const long long after = static_cast<long long>(i + 1) * config.num_urllc / n;
        v.slice = after > before ? Slice::urllc : Slice::embb;
        v.position_m = {offset + i * config.inter_vehicle_distance_m, 0.0};
        v.velocity_mps = {config.speed_mps(), 0.0};
        sc.vehicles.push_back(v);
    }

    associate(sc.vehicles, geo);
    assign_reporters(sc.vehicles);
    return sc;
}

void advance_mobility(std::span<VehicleState> vehicles, double dt_s, double road_length_m)
{
    for (auto& v : vehicles) {
        v.position_m.x += v.velocity_mps.x * dt_s;
        v.position_m.y += v.velocity_mps.y * dt_s;
        if (road_length_m > 0.0) {
            v.position_m.x = std::fmod(v.position_m.x, road_length_m);
            if (v.position_m.x < 0.0) v.position_m.x += road_length_m;
        }
    }
}

void associate(std::span<VehicleState> vehicles, const EnvironmentGeometry& geometry,
               const PathLossModel& model)
{
    if (geometry.rsu_positions_m.empty()) throw ContractViolation("associate: no RSUs");
    for (auto& v : vehicles) {
        RsuId best = 0;
        double best_loss = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < geometry.rsu_positions_m.size(); ++s) {
            const double d_km = distance(v.position_m, geometry.rsu_positions_m[s]) * 1e-3;
            const double loss = model.loss_db(d_km);
            if (loss < best_loss) {
                best_loss = loss;
                best = static_cast<RsuId>(s);
            }
        }
        v.serving_rsu = best;
    }
}

namespace {

// Strictly nearer wins; on an (almost) exact tie the vehicle further along
// the direction of travel wins, so equally spaced platoons pair consistently.
bool better_reporter(double d, double x, double best_d, double best_x)
{
    constexpr double tie_m = 1e-9;
    if (d < best_d - tie_m) return true;
    return d <= best_d + tie_m && x > best_x;
}

} // namespace

void assign_reporters(std::span<VehicleState> vehicles)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (auto& e : vehicles) {
        if (e.slice == Slice::urllc) {
            e.paired_reporter.reset();
            continue;
        }
        std::optional<VehicleId> same_rsu, anywhere;
        double d_same = inf, x_same = -inf;
        double d_any = inf, x_any = -inf;
        for (const auto& u : vehicles) {
            if (u.slice != Slice::urllc) continue;
            const double d = distance(e.position_m, u.position_m);
            const double x = u.position_m.x;
            if (better_reporter(d, x, d_any, x_any)) {
                d_any = d;
                x_any = x;
                anywhere = u.id;
            }
            if (u.serving_rsu == e.serving_rsu && better_reporter(d, x, d_same, x_same)) {
                d_same = d;
                x_same = x;
                same_rsu = u.id;
            }
        }
        e.paired_reporter = same_rsu ? same_rsu : anywhere;
    }
}

} // namespace vslice
