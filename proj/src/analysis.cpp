// SPDX-License-Identifier: Apache-2.0

#include "vslice/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vslice {

// --- mutual information ------------------------------------------------------

std::vector<double> equiprobable_edges(std::span<const double> samples, int bins)
{
    if (bins < 2) throw ContractViolation("equiprobable_edges: bins must be >= 2");
    if (samples.empty()) throw ContractViolation("equiprobable_edges: no samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    std::vector<double> edges;
    for (int j = 1; j < bins; ++j) edges.push_back(sorted[static_cast<std::size_t>(j) * n / static_cast<std::size_t>(bins)]);
    return edges;
}

int bin_of(double value, std::span<const double> edges)
{
    return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), value) - edges.begin());
}

double estimate_mi(std::span<const double> x, std::span<const double> y, int bins)
{
    if (x.size() != y.size()) throw ContractViolation("estimate_mi: length mismatch");
    if (x.size() < 2) throw ContractViolation("estimate_mi: need at least two samples");
    if (bins < 2) throw ContractViolation("estimate_mi: bins must be >= 2");

    const auto ex = equiprobable_edges(x, bins);
    const auto ey = equiprobable_edges(y, bins);
    const auto b = static_cast<std::size_t>(bins);
    std::vector<double> joint(b * b, 0.0), px(b, 0.0), py(b, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto bx = static_cast<std::size_t>(bin_of(x[i], ex));
        const auto by = static_cast<std::size_t>(bin_of(y[i], ey));
        joint[bx * b + by] += 1.0;
        px[bx] += 1.0;
        py[by] += 1.0;
    }
    const double n = static_cast<double>(x.size());
    double mi = 0.0;
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < b; ++j) {
            const double c = joint[i * b + j];
            if (c > 0.0) mi += c / n * std::log(c * n / (px[i] * py[j]));
        }
    return std::max(mi, 0.0);
}

// --- canonical correlation ---------------------------------------------------

namespace {

Eigen::MatrixXd centered(const Eigen::MatrixXd& m)
{
    return m.rowwise() - m.colwise().mean();
}

} // namespace

CcaResult canonical_corr(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y)
{
    if (x.rows() != y.rows()) throw ContractViolation("canonical_corr: sample count mismatch");
    if (x.cols() < 1 || y.cols() < 1) throw ContractViolation("canonical_corr: empty feature set");
    if (x.rows() < std::max(x.cols(), y.cols()) + 1) throw ContractViolation("canonical_corr: too few samples");

    const Eigen::MatrixXd xc = centered(x);
    const Eigen::MatrixXd yc = centered(y);
    if (xc.squaredNorm() == 0.0 || yc.squaredNorm() == 0.0) return {0.0, true};

    constexpr double reg = 1e-9;
    const double scale = 1.0 / static_cast<double>(x.rows() - 1);
    Eigen::MatrixXd cxx = xc.transpose() * xc * scale;
    Eigen::MatrixXd cyy = yc.transpose() * yc * scale;
    const Eigen::MatrixXd cxy = xc.transpose() * yc * scale;
    cxx.diagonal().array() += reg;
    cyy.diagonal().array() += reg;

    const Eigen::LLT<Eigen::MatrixXd> lx(cxx), ly(cyy);
    if (lx.info() != Eigen::Success || ly.info() != Eigen::Success) return {0.0, true};
    // Whitened cross-covariance Lx^-1 Cxy Ly^-T; its top singular value is
    // the first canonical correlation.
    const Eigen::MatrixXd a = lx.matrixL().solve(cxy);
    const Eigen::MatrixXd m = ly.matrixL().solve(a.transpose()).transpose();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return {std::clamp(svd.singularValues()(0), 0.0, 1.0), false};
}

// --- CCDF --------------------------------------------------------------------

CcdfCurve::CcdfCurve(std::vector<double> samples) : sorted_(std::move(samples))
{
    if (sorted_.empty()) throw ContractViolation("ccdf: empty sample set");
    std::sort(sorted_.begin(), sorted_.end());
}

double CcdfCurve::operator()(double x) const
{
    const auto above = sorted_.end() - std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(above) / static_cast<double>(sorted_.size());
}

double CcdfCurve::quantile(double p) const
{
    if (!(p > 0.0 && p <= 1.0)) throw ContractViolation("CcdfCurve::quantile: p must be in (0, 1]");
    const auto n = static_cast<double>(sorted_.size());
    auto k = static_cast<std::size_t>(std::ceil(p * n - 1e-12));
    k = std::clamp<std::size_t>(k, 1, sorted_.size());
    return sorted_[k - 1];
}

double CcdfCurve::area() const
{
    // Integral of P(X > x) over x >= 0 for non-negative samples: the sum of
    // each step's height times its width.
    double total = 0.0, prev = 0.0;
    const double n = static_cast<double>(sorted_.size());
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
        const double v = std::max(sorted_[i], 0.0);
        total += (v - prev) * static_cast<double>(sorted_.size() - i) / n;
        prev = v;
    }
    return total;
}

std::vector<std::pair<double, double>> CcdfCurve::points() const
{
    std::vector<std::pair<double, double>> out;
    const double n = static_cast<double>(sorted_.size());
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
        if (i + 1 < sorted_.size() && sorted_[i + 1] == sorted_[i]) continue;
        out.emplace_back(sorted_[i], static_cast<double>(sorted_.size() - i - 1) / n);
    }
    return out;
}

CcdfCurve ccdf(std::span<const double> samples)
{
    return CcdfCurve(std::vector<double>(samples.begin(), samples.end()));
}

// --- metrics -----------------------------------------------------------------

MetricsSummary aggregate(const RateTracker& tracker, const OverheadLedger& ledger,
                         std::span<const VehicleState> vehicles, const ScenarioConfig& config)
{
    MetricsSummary out;
    std::vector<double> embb_means;
    int satisfied = 0;
    double urllc_viol = 0.0;
    int urllc = 0;
    for (const auto& v : vehicles) {
        if (tracker.count(v.id) == 0) continue;
        if (v.slice == Slice::embb) {
            embb_means.push_back(tracker.running_mean(v.id));
            if (tracker.violation_probability(v.id, config.rate_target_embb_bps) < 0.5) ++satisfied;
        } else {
            urllc_viol += tracker.violation_probability(v.id, config.rate_target_urllc_bps);
            ++urllc;
        }
    }
    if (!embb_means.empty()) {
        const double n = static_cast<double>(embb_means.size());
        const double mean = std::accumulate(embb_means.begin(), embb_means.end(), 0.0) / n;
        double var = 0.0;
        for (double m : embb_means) var += (m - mean) * (m - mean);
        out.mean_embb_rate_bps = mean;
        out.std_embb_rate_bps = std::sqrt(var / n);
        out.embb_satisfaction = satisfied / n;
    }
    if (urllc > 0) out.urllc_violation = urllc_viol / urllc;
    out.overhead_reports = ledger.total_reports();
    out.overhead_full_reports = ledger.total_full_reports();
    out.overhead_reduction = ledger.reduction();
    return out;
}

// --- angular grouping --------------------------------------------------------

std::vector<double> grouped_profile(std::span<const std::uint8_t> levels, int resolution)
{
    if (resolution < 1 || levels.size() % static_cast<std::size_t>(resolution) != 0)
        throw ContractViolation("grouped_profile: profile length must be a multiple of the resolution");
    const std::size_t width = levels.size() / static_cast<std::size_t>(resolution);
    std::vector<double> out(static_cast<std::size_t>(resolution), 0.0);
    for (std::size_t g = 0; g < out.size(); ++g)
        out[g] = *std::max_element(levels.begin() + static_cast<std::ptrdiff_t>(g * width),
                                   levels.begin() + static_cast<std::ptrdiff_t>((g + 1) * width));
    return out;
}

int dominant_group(std::span<const std::uint8_t> levels, int resolution)
{
    const auto g = grouped_profile(levels, resolution);
    return static_cast<int>(std::max_element(g.begin(), g.end()) - g.begin());
}

} // namespace vslice
