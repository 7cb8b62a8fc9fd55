// SPDX-License-Identifier: Apache-2.0

#include "vslice/sched.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace vslice {

// --- RateTracker -------------------------------------------------------------

RateTracker::RateTracker(int num_vehicles, std::vector<double> thresholds_bps)
    : thresholds_(std::move(thresholds_bps)), mean_(static_cast<std::size_t>(num_vehicles), 0.0),
      ticks_(static_cast<std::size_t>(num_vehicles), 0),
      violations_(thresholds_.size(), std::vector<std::int64_t>(static_cast<std::size_t>(num_vehicles), 0))
{
}

std::size_t RateTracker::threshold_slot(double threshold_bps) const
{
    for (std::size_t i = 0; i < thresholds_.size(); ++i)
        if (thresholds_[i] == threshold_bps) return i;
    throw ContractViolation("RateTracker: threshold was not registered");
}

void RateTracker::update(VehicleId v, double rate_bps)
{
    const auto i = static_cast<std::size_t>(v);
    const auto t = ++ticks_.at(i);
    mean_[i] += (rate_bps - mean_[i]) / static_cast<double>(t);
    for (std::size_t k = 0; k < thresholds_.size(); ++k)
        if (mean_[i] <= thresholds_[k]) ++violations_[k][i];
}

std::int64_t RateTracker::violation_count(VehicleId v, double threshold_bps) const
{
    return violations_[threshold_slot(threshold_bps)].at(static_cast<std::size_t>(v));
}

double RateTracker::violation_probability(VehicleId v, double threshold_bps) const
{
    const auto t = count(v);
    if (t == 0) throw ContractViolation("violation_probability: no TTIs recorded");
    return static_cast<double>(violation_count(v, threshold_bps)) / static_cast<double>(t);
}

double RateTracker::projected_mean(VehicleId v, double rate_bps) const
{
    const double m = running_mean(v);
    return m + (rate_bps - m) / static_cast<double>(count(v) + 1);
}

double RateTracker::projected_violation_probability(VehicleId v, double threshold_bps, double rate_bps) const
{
    const auto hits = violation_count(v, threshold_bps) + (projected_mean(v, rate_bps) <= threshold_bps ? 1 : 0);
    return static_cast<double>(hits) / static_cast<double>(count(v) + 1);
}

// --- OverheadLedger ----------------------------------------------------------

void OverheadLedger::record_tti(std::int64_t reports, std::int64_t full_reports)
{
    total_reports_ += reports;
    total_full_ += full_reports;
    ++ttis_;
}

double OverheadLedger::reduction() const
{
    if (total_full_ == 0) return 0.0;
    return 1.0 - static_cast<double>(total_reports_) / static_cast<double>(total_full_);
}

// --- URLLC -------------------------------------------------------------------

namespace {

constexpr std::size_t kMaxOutageStates = 4096;

// Merges states onto multiples of a quantum, rounding down, until at most
// kMaxOutageStates remain. Lower delivered rates only add outage.
std::map<double, double> coarsen(const std::map<double, double>& states, double target)
{
    double quantum = target / static_cast<double>(kMaxOutageStates);
    std::map<double, double> out = states;
    while (out.size() > kMaxOutageStates) {
        out.clear();
        for (const auto& [acc, p] : states) out[std::floor(acc / quantum) * quantum] += p;
        quantum *= 2.0;
    }
    return out;
}

std::vector<int> ranked_free_rbs(const SchedVehicle& v, const RbQuality& q, const ResourceGrid& grid)
{
    std::vector<int> rbs;
    for (int b = 0; b < grid.num_rb(); ++b)
        if (grid.is_free(v.rsu, b)) rbs.push_back(b);
    std::stable_sort(rbs.begin(), rbs.end(), [&](int a, int b) { return q.expected(a) > q.expected(b); });
    return rbs;
}

} // namespace

double delivery_outage(std::span<const double> rate_bps, std::span<const double> bler, double target_bps,
                       double tolerance)
{
    if (rate_bps.size() != bler.size()) throw ContractViolation("delivery_outage: size mismatch");
    // Largest rates first so branches resolve early.
    std::vector<std::size_t> order(rate_bps.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rate_bps[a] > rate_bps[b]; });
    std::vector<double> r, e;
    for (auto i : order) {
        if (rate_bps[i] <= 0.0) continue;
        r.push_back(rate_bps[i]);
        e.push_back(bler[i]);
    }
    std::vector<double> tail(r.size() + 1, 0.0);
    for (std::size_t i = r.size(); i-- > 0;) tail[i] = tail[i + 1] + r[i];
    if (tail[0] <= target_bps) return 1.0;

    // Distribution of the delivered rate over RBs seen so far, restricted to
    // branches whose outcome is still open.
    std::map<double, double> states{{0.0, 1.0}};
    double outage = 0.0;
    for (std::size_t i = 0; i < r.size() && !states.empty(); ++i) {
        std::map<double, double> next;
        for (const auto& [acc, p] : states) {
            for (const auto& [a, q] : {std::pair{acc, p * e[i]}, std::pair{acc + r[i], p * (1.0 - e[i])}}) {
                if (q == 0.0 || a > target_bps) continue;
                if (a + tail[i + 1] <= target_bps || q < tolerance) outage += q;
                else next[a] += q;
            }
        }
        states = next.size() > kMaxOutageStates ? coarsen(next, target_bps) : std::move(next);
    }
    return std::min(outage, 1.0);
}

bool urllc_satisfied(VehicleId v, std::span<const int> rbs, const RbQuality& quality, const RateTracker& tracker,
                     const UrllcPolicy& policy)
{
    double expected = 0.0;
    std::vector<double> rate, err;
    for (int b : rbs) {
        expected += quality.expected(b);
        rate.push_back(quality.rate_bps[static_cast<std::size_t>(b)]);
        err.push_back(quality.bler[static_cast<std::size_t>(b)]);
    }
    if (!(tracker.projected_mean(v, expected) > policy.target_bps * (1.0 + policy.margin))) return false;
    return delivery_outage(rate, err, policy.target_bps, 1e-6 * policy.epsilon) <= policy.epsilon;
}

std::vector<SchedVehicle> urllc_priority(std::span<const SchedVehicle> urllc, const RateTracker& tracker,
                                         const UrllcPolicy& policy)
{
    std::vector<SchedVehicle> order(urllc.begin(), urllc.end());
    auto urgent = [&](const SchedVehicle& v) {
        return tracker.count(v.id) > 0 && tracker.violation_probability(v.id, policy.target_bps) > policy.epsilon;
    };
    std::stable_sort(order.begin(), order.end(), [&](const SchedVehicle& a, const SchedVehicle& b) {
        const bool ua = urgent(a), ub = urgent(b);
        if (ua != ub) return ua;
        const double da = policy.target_bps - tracker.running_mean(a.id);
        const double db = policy.target_bps - tracker.running_mean(b.id);
        if (da != db) return da > db;
        return a.id < b.id;
    });
    return order;
}

std::vector<UrllcOutcome> allocate_urllc(std::span<const SchedVehicle> urllc, std::span<const RbQuality> quality,
                                         const RateTracker& tracker, const UrllcPolicy& policy, ResourceGrid& grid)
{
    std::vector<UrllcOutcome> out;
    for (const auto& v : urllc_priority(urllc, tracker, policy)) {
        const auto& q = quality[static_cast<std::size_t>(v.id)];
        UrllcOutcome res{v.id, false, {}};
        res.satisfied = urllc_satisfied(v.id, res.rbs, q, tracker, policy);
        for (int b : ranked_free_rbs(v, q, grid)) {
            if (res.satisfied || !(q.expected(b) > 0.0)) break;
            grid.assign(v.rsu, b, v.id);
            res.rbs.push_back(b);
            res.satisfied = urllc_satisfied(v.id, res.rbs, q, tracker, policy);
        }
        out.push_back(std::move(res));
    }
    return out;
}

// --- eMBB --------------------------------------------------------------------

void allocate_embb_minmax(std::span<const SchedVehicle> embb, std::span<const RbQuality> quality,
                          const RateTracker& tracker, double target_bps, ResourceGrid& grid)
{
    for (RsuId s = 0; s < grid.num_rsu(); ++s) {
        std::vector<SchedVehicle> local;
        for (const auto& v : embb)
            if (v.rsu == s) local.push_back(v);
        if (local.empty()) continue;

        std::vector<double> projected_rate(local.size(), 0.0);
        for (;;) {
            // Pick the worst-off vehicle under the current projection.
            std::size_t pick = 0;
            double pick_viol = -1.0, pick_mean = 0.0;
            for (std::size_t i = 0; i < local.size(); ++i) {
                const VehicleId id = local[i].id;
                const double viol = tracker.projected_violation_probability(id, target_bps, projected_rate[i]);
                const double mean = tracker.projected_mean(id, projected_rate[i]);
                const bool better = viol > pick_viol ||
                                    (viol == pick_viol && (mean < pick_mean || (mean == pick_mean && id < local[pick].id)));
                if (better) {
                    pick = i;
                    pick_viol = viol;
                    pick_mean = mean;
                }
            }
            const auto& q = quality[static_cast<std::size_t>(local[pick].id)];
            int best_rb = -1;
            for (int b = 0; b < grid.num_rb(); ++b) {
                if (!grid.is_free(s, b)) continue;
                if (best_rb < 0 || q.expected(b) > q.expected(best_rb)) best_rb = b;
            }
            if (best_rb < 0) break;
            grid.assign(s, best_rb, local[pick].id);
            projected_rate[pick] += q.expected(best_rb);
        }
    }
}

} // namespace vslice
