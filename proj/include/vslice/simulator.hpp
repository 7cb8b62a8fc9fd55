// SPDX-License-Identifier: Apache-2.0
//
// Per-TTI system simulation: association, CSI acquisition (reported or
// inferred), URLLC/eMBB allocation, realised rate, HARQ goodput and CSI
// overhead bookkeeping. Also records the channel traces used for training.

#ifndef VSLICE_SIMULATOR_HPP
#define VSLICE_SIMULATOR_HPP

#include <cstdint>
#include <deque>
#include <span>
#include <string_view>
#include <vector>

#include "vslice/channel.hpp"
#include "vslice/config.hpp"
#include "vslice/grid.hpp"
#include "vslice/l2s.hpp"
#include "vslice/phy.hpp"
#include "vslice/scenario.hpp"
#include "vslice/sched.hpp"

namespace vslice {

/// What the inference stage sees for one eMBB vehicle.
struct InferenceRequest {
    VehicleId embb = 0;
    VehicleId reporter = 0;
    std::int64_t tti = 0;
    const AngularCsi* reporter_csi = nullptr;
};

/// Maps a reporter's angular CSI to a beam for the paired eMBB vehicle.
class BeamInferrer {
public:
    virtual ~BeamInferrer() = default;
    virtual BeamIndex infer(const InferenceRequest& request) const = 0;
};

/// Everything the scheduler decided and observed in one TTI.
struct TtiRecord {
    std::int64_t tti = 0;
    ResourceGrid grid;
    std::vector<BeamIndex> beams;     // by vehicle id
    std::vector<RbQuality> quality;   // estimates the allocation used, by vehicle id
    std::vector<double> rate_bps;     // realised rate, by vehicle id
    std::vector<double> goodput_bits; // HARQ-delivered bits this TTI, by vehicle id
    std::vector<UrllcOutcome> urllc;
    std::vector<VehicleState> vehicles; // state the TTI was scheduled with
};

/// Channel gains of one TTI, indexed by (rsu, vehicle).
class LinkTable : public ChannelSource {
public:
    LinkTable() = default;
    LinkTable(int num_rsu, int num_vehicles) : num_vehicles_(num_vehicles), links_(static_cast<std::size_t>(num_rsu * num_vehicles)) {}

    LinkGains& at(RsuId s, VehicleId v) { return links_[index(s, v)]; }
    const LinkGains& at(RsuId s, VehicleId v) const { return links_[index(s, v)]; }

    double beam_gain(RsuId rsu, VehicleId vehicle, int rb, BeamIndex beam) const override
    {
        return at(rsu, vehicle).gain(rb, beam);
    }

private:
    std::size_t index(RsuId s, VehicleId v) const { return static_cast<std::size_t>(s * num_vehicles_ + v); }

    int num_vehicles_ = 0;
    std::vector<LinkGains> links_;
};

class Simulation {
public:
    /// Throws ConfigError in inferred mode if an eMBB vehicle has no reporter.
    explicit Simulation(ScenarioConfig config);

    /// Required before stepping in inferred mode. Not owned.
    void set_inferrer(const BeamInferrer* inferrer) { inferrer_ = inferrer; }

    TtiRecord step();

    const ScenarioConfig& config() const { return config_; }
    const std::vector<VehicleState>& vehicles() const { return scenario_.vehicles; }
    const EnvironmentGeometry& geometry() const { return scenario_.geometry; }
    const RateTracker& tracker() const { return tracker_; }
    const OverheadLedger& ledger() const { return ledger_; }
    std::int64_t tti() const { return tti_; }
    const MiCurve& curve() const { return curve_; }
    LinkConstants link_constants() const { return link_; }
    int reference_rb() const { return config_.num_rb / 2; }

    /// Goodput delivered by HARQ so far, in bits, by vehicle id.
    const std::vector<double>& delivered_bits() const { return delivered_bits_; }

    /// Serving-link beam gains of `vehicle` at the current TTI and position
    /// (all beams, reference RB) and the resulting optimal beam.
    std::vector<double> serving_profile(VehicleId vehicle) const;
    BeamIndex true_beam(VehicleId vehicle) const;

private:
    LinkGains make_link(RsuId rsu, const VehicleState& v) const;

    ScenarioConfig config_;
    Scenario scenario_;
    ScattererFading fading_;
    MiCurve curve_;
    LinkConstants link_;
    RateTracker tracker_;
    OverheadLedger ledger_;
    std::vector<HarqProcess> harq_;
    std::vector<double> delivered_bits_;
    std::vector<std::vector<double>> last_interference_; // [vehicle][rb]
    std::deque<std::vector<AngularCsi>> csi_history_;    // most recent last, by vehicle id
    const BeamInferrer* inferrer_ = nullptr;
    Rng harq_rng_;
    std::int64_t tti_ = 0;
};

TtiRecord schedule_tti_perfect(Simulation& sim);
TtiRecord schedule_tti_inferred(Simulation& sim, const BeamInferrer& inferrer);

/// Stand-in inferrer that returns the true optimal beam of the eMBB vehicle.
class OracleInferrer : public BeamInferrer {
public:
    explicit OracleInferrer(const Simulation& sim) : sim_(sim) {}
    BeamIndex infer(const InferenceRequest& request) const override { return sim_.true_beam(request.embb); }

private:
    const Simulation& sim_;
};

/// Channel trace for training and analysis: per TTI, the angular CSI of every
/// URLLC reporter and the serving-link beam gain profile of every eMBB vehicle.
struct Trace {
    int n_tx = 0;
    int num_levels = 16;
    double quantizer_range_db = 40.0;
    std::int64_t num_ttis = 0;
    std::vector<VehicleId> embb_ids;
    std::vector<VehicleId> reporter_of; // reporter id per eMBB index
    std::vector<VehicleId> urllc_ids;

    // Flattened [tti][urllc index][beam].
    std::vector<std::uint8_t> urllc_features;
    // Flattened [tti][embb index][beam].
    std::vector<std::uint8_t> embb_features;
    std::vector<float> embb_gains;
    // [tti][embb index]
    std::vector<std::uint8_t> embb_beam;

    std::span<const std::uint8_t> reporter_features(std::int64_t tti, std::size_t embb_index) const;
    std::span<const std::uint8_t> embb_feature(std::int64_t tti, std::size_t embb_index) const;
    std::span<const float> gains(std::int64_t tti, std::size_t embb_index) const;
    BeamIndex label(std::int64_t tti, std::size_t embb_index) const;
};

/// Records `num_ttis` TTIs of mobility on the scenario of `config` using the
/// scatterer fading sub-stream `stream` (distinct from the simulation's).
Trace generate_trace(const ScenarioConfig& config, std::int64_t num_ttis, std::string_view stream = "training");

} // namespace vslice

#endif
