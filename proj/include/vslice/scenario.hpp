// SPDX-License-Identifier: Apache-2.0
//
// Road layout, vehicles, scatterers and max-RSSI association.
//
// The road is a single straight lane along x (y = 0) of length
// num_vehicles * inter_vehicle_distance_m that wraps around, so vehicle
// density stays constant. RSUs sit at uniform spacing, offset laterally.

#ifndef VSLICE_SCENARIO_HPP
#define VSLICE_SCENARIO_HPP

#include <optional>
#include <span>
#include <vector>

#include "vslice/common.hpp"
#include "vslice/config.hpp"

namespace vslice {

struct VehicleState {
    VehicleId id = 0;
    Slice slice = Slice::urllc;
    Vec2 position_m;
    Vec2 velocity_mps;
    RsuId serving_rsu = 0;
    /// URLLC vehicle whose reported CSI seeds inference for this eMBB vehicle.
    std::optional<VehicleId> paired_reporter;
};

struct EnvironmentGeometry {
    double road_length_m = 0.0;
    std::vector<Vec2> rsu_positions_m;
    std::vector<Vec2> scatterer_positions_m;
    std::vector<Complex> reflection_coefficients;
};

/// Distance-dependent path loss, PL = intercept + slope * log10(d_km).
struct PathLossModel {
    double intercept_db = 100.7;
    double slope_db_per_decade = 23.5;

    double loss_db(double d_km) const;
};

struct Scenario {
    std::vector<VehicleState> vehicles;
    EnvironmentGeometry geometry;
};

/// Deterministic for a fixed config.seed. Draws from the "geometry" stream only.
Scenario build_scenario(const ScenarioConfig& config);

/// x += v * dt, wrapped onto [0, road_length).
void advance_mobility(std::span<VehicleState> vehicles, double dt_s, double road_length_m);

/// Serving RSU = max received power (tx - PL); ties go to the lowest RSU id.
void associate(std::span<VehicleState> vehicles, const EnvironmentGeometry& geometry,
               const PathLossModel& model = {});

/// Pairs each eMBB vehicle with the nearest URLLC vehicle under the same RSU,
/// falling back to the nearest URLLC vehicle anywhere. Exact ties go to the
/// vehicle further along the road. Requires association.
void assign_reporters(std::span<VehicleState> vehicles);

} // namespace vslice

#endif
