// SPDX-License-Identifier: Apache-2.0
//
// Joint URLLC/eMBB RB allocation: URLLC first under the epsilon reliability
// constraint, then min-max eMBB threshold-violation on the remaining RBs.

#ifndef VSLICE_SCHED_HPP
#define VSLICE_SCHED_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "vslice/common.hpp"
#include "vslice/grid.hpp"

namespace vslice {

/// Running-average rate and empirical violation counts per vehicle.
/// The mean is updated by recurrence; violations are counted against a fixed
/// set of thresholds registered at construction.
class RateTracker {
public:
    RateTracker() = default;
    RateTracker(int num_vehicles, std::vector<double> thresholds_bps);

    void update(VehicleId v, double rate_bps);

    std::int64_t count(VehicleId v) const { return ticks_.at(static_cast<std::size_t>(v)); }
    double running_mean(VehicleId v) const { return mean_.at(static_cast<std::size_t>(v)); }

    /// Fraction of TTIs tau <= t with running mean <= threshold. t = 0 is a
    /// contract violation, as is an unregistered threshold.
    double violation_probability(VehicleId v, double threshold_bps) const;
    std::int64_t violation_count(VehicleId v, double threshold_bps) const;

    /// Running mean after one more TTI delivering `rate_bps`.
    double projected_mean(VehicleId v, double rate_bps) const;
    /// Violation probability after one more TTI delivering `rate_bps`.
    double projected_violation_probability(VehicleId v, double threshold_bps, double rate_bps) const;

    int num_vehicles() const { return static_cast<int>(mean_.size()); }

private:
    std::size_t threshold_slot(double threshold_bps) const;

    std::vector<double> thresholds_;
    std::vector<double> mean_;
    std::vector<std::int64_t> ticks_;
    std::vector<std::vector<std::int64_t>> violations_; // [threshold][vehicle]
};

/// CSI report bookkeeping. `reports` counts uplink CSI reports actually
/// requested; `full_reports` what a report-from-every-vehicle policy would need.
class OverheadLedger {
public:
    void record_tti(std::int64_t reports, std::int64_t full_reports);

    std::int64_t total_reports() const { return total_reports_; }
    std::int64_t total_full_reports() const { return total_full_; }
    std::int64_t ttis() const { return ttis_; }
    /// 1 - reports / full_reports (0 when nothing was recorded).
    double reduction() const;

private:
    std::int64_t total_reports_ = 0;
    std::int64_t total_full_ = 0;
    std::int64_t ttis_ = 0;
};

/// Scheduler view of one vehicle.
struct SchedVehicle {
    VehicleId id = 0;
    RsuId rsu = 0;
};

/// Per-RB link estimate of one vehicle: nominal rate omega*log2(1+SINR)
/// and block error probability.
struct RbQuality {
    std::vector<double> rate_bps;
    std::vector<double> bler;

    double expected(int rb) const
    {
        const auto i = static_cast<std::size_t>(rb);
        return rate_bps[i] * (1.0 - bler[i]);
    }
};

struct UrllcPolicy {
    double target_bps = 128e3;
    double epsilon = 0.01;
    double margin = 0.05;
};

struct UrllcOutcome {
    VehicleId id = 0;
    bool satisfied = false;
    std::vector<int> rbs;
};

/// P(sum_b rate_b X_b <= target) with independent X_b ~ Bernoulli(1 - bler_b).
/// Exact for tolerance 0 while the delivered-rate distribution has at most
/// 4096 support points. Branches less likely than `tolerance` count as
/// outage and larger supports are rounded down, so the result never
/// underestimates the true value.
double delivery_outage(std::span<const double> rate_bps, std::span<const double> bler, double target_bps,
                       double tolerance = 0.0);

/// True when `rbs` meet both URLLC conditions for vehicle `v`: projected
/// running mean (expected rates) strictly above target*(1+margin), and
/// per-TTI delivery outage at most epsilon.
bool urllc_satisfied(VehicleId v, std::span<const int> rbs, const RbQuality& quality, const RateTracker& tracker,
                     const UrllcPolicy& policy);

/// Order in which URLLC vehicles are served: vehicles whose empirical
/// violation exceeds epsilon first, then by descending deficit, then id.
std::vector<SchedVehicle> urllc_priority(std::span<const SchedVehicle> urllc, const RateTracker& tracker,
                                         const UrllcPolicy& policy);

/// Greedy: each vehicle (priority order) takes its best free RBs until
/// urllc_satisfied holds or no RB with positive expected rate remains.
/// `quality` is indexed by vehicle id.
std::vector<UrllcOutcome> allocate_urllc(std::span<const SchedVehicle> urllc, std::span<const RbQuality> quality,
                                         const RateTracker& tracker, const UrllcPolicy& policy, ResourceGrid& grid);

/// Hands out every remaining RB one at a time: the vehicle with the highest
/// projected violation probability against `target_bps` (ties: lower projected
/// mean, then lower id) takes its best free RB.
void allocate_embb_minmax(std::span<const SchedVehicle> embb, std::span<const RbQuality> quality,
                          const RateTracker& tracker, double target_bps, ResourceGrid& grid);

} // namespace vslice

#endif
