// SPDX-License-Identifier: Apache-2.0
//
// Post-processing: histogram mutual information, first canonical
// correlation, empirical CCDFs and the per-run metrics summary.

#ifndef VSLICE_ANALYSIS_HPP
#define VSLICE_ANALYSIS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vslice/config.hpp"
#include "vslice/scenario.hpp"
#include "vslice/sched.hpp"

namespace vslice {

/// Plug-in MI estimate (nats) on a bins x bins grid with equiprobable
/// marginal edges. Throws ContractViolation on length mismatch, n < 2 or
/// bins < 2.
double estimate_mi(std::span<const double> x, std::span<const double> y, int bins);

/// Bin index of `value` given edges from equiprobable_edges (0..edges.size()).
int bin_of(double value, std::span<const double> edges);
/// bins - 1 interior edges: sorted[floor(j n / bins)], j = 1..bins-1.
std::vector<double> equiprobable_edges(std::span<const double> samples, int bins);

struct CcaResult {
    double correlation = 0.0; // in [0, 1]
    bool degenerate = false;  // an input had no variance
};

/// First canonical correlation between the columns of X and Y (rows are
/// samples). Covariances get +1e-9 on the diagonal.
CcaResult canonical_corr(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Empirical complementary CDF, P(X > x), right-continuous steps.
class CcdfCurve {
public:
    explicit CcdfCurve(std::vector<double> samples);

    double operator()(double x) const;
    /// Smallest sample value v with P(X <= v) >= p, i.e. sorted[ceil(p n) - 1].
    double quantile(double p) const;
    /// Sum of step areas; equals the sample mean for non-negative samples.
    double area() const;
    /// (value, P(X > value)) at every distinct sample value, ascending.
    std::vector<std::pair<double, double>> points() const;

    std::size_t size() const { return sorted_.size(); }
    const std::vector<double>& sorted() const { return sorted_; }

private:
    std::vector<double> sorted_;
};

/// Throws ContractViolation on an empty sample set.
CcdfCurve ccdf(std::span<const double> samples);

struct MetricsSummary {
    double mean_embb_rate_bps = 0.0;
    double std_embb_rate_bps = 0.0;       // population std across eMBB vehicles
    std::optional<double> embb_satisfaction; // absent without eMBB vehicles
    std::optional<double> urllc_violation;   // absent without URLLC vehicles
    std::int64_t overhead_reports = 0;
    std::int64_t overhead_full_reports = 0;
    double overhead_reduction = 0.0;
};

/// Per-vehicle figures are final running means and violation probabilities;
/// an eMBB vehicle counts as satisfied when its violation probability
/// against the eMBB target is below 0.5.
MetricsSummary aggregate(const RateTracker& tracker, const OverheadLedger& ledger,
                         std::span<const VehicleState> vehicles, const ScenarioConfig& config);

/// Index of the strongest of `resolution` equal-width groups of a per-beam
/// profile (ties to the lowest group). The profile length must be a multiple
/// of `resolution`.
int dominant_group(std::span<const std::uint8_t> levels, int resolution);
/// Per-group maximum of a per-beam profile.
std::vector<double> grouped_profile(std::span<const std::uint8_t> levels, int resolution);

} // namespace vslice

#endif
