// SPDX-License-Identifier: Apache-2.0

#include "vslice/simulator.hpp"

#include <algorithm>

namespace vslice {

Simulation::Simulation(ScenarioConfig config)
    : config_(std::move(config)), scenario_(build_scenario(config_)),
      fading_(config_.num_scatterers, ScattererFading::correlation_for(config_), stream_seed(config_.seed, "channel")),
      curve_{config_.modulation_order_bits, config_.mi_threshold_bits, config_.bler_slope},
      link_{config_.power_per_rb_w(), noise_power_w(config_.rb_width_hz(), config_.noise_figure_db), config_.rb_width_hz()},
      tracker_(config_.num_vehicles(), {config_.rate_target_urllc_bps, config_.rate_target_embb_bps}),
      delivered_bits_(static_cast<std::size_t>(config_.num_vehicles()), 0.0),
      last_interference_(static_cast<std::size_t>(config_.num_vehicles()),
                         std::vector<double>(static_cast<std::size_t>(config_.num_rb), 0.0)),
      harq_rng_(config_.seed, "harq")
{
    for (const auto& v : scenario_.vehicles) {
        harq_.push_back(HarqProcess{v.id, 0.0, 0, 0.0});
        if (config_.mode == CsiMode::inferred && v.slice == Slice::embb && !v.paired_reporter)
            throw ConfigError("inferred mode: eMBB vehicle " + std::to_string(v.id) + " has no URLLC reporter");
    }
}

LinkGains Simulation::make_link(RsuId rsu, const VehicleState& v) const
{
    return LinkGains(trace_paths(scenario_.geometry.rsu_positions_m[static_cast<std::size_t>(rsu)], v.position_m,
                                 scenario_.geometry, fading_, tti_, config_.wavelength_m()),
                     config_);
}

std::vector<double> Simulation::serving_profile(VehicleId vehicle) const
{
    const auto& v = scenario_.vehicles.at(static_cast<std::size_t>(vehicle));
    return make_link(v.serving_rsu, v).profile(reference_rb());
}

BeamIndex Simulation::true_beam(VehicleId vehicle) const
{
    const auto g = serving_profile(vehicle);
    return argmax_beam(g);
}

TtiRecord Simulation::step()
{
    const bool inferred = config_.mode == CsiMode::inferred;
    if (inferred && inferrer_ == nullptr) throw ConfigError("inferred mode requires a beam inferrer");

    auto& vehicles = scenario_.vehicles;
    associate(vehicles, scenario_.geometry);

    const int n = config_.num_vehicles();
    const int num_rsu = config_.num_rsu;
    const int ref_rb = reference_rb();

    LinkTable links(num_rsu, n);
    for (RsuId s = 0; s < num_rsu; ++s)
        for (const auto& v : vehicles) links.at(s, v.id) = make_link(s, v);

    TtiRecord rec;
    rec.tti = tti_;
    rec.vehicles = vehicles;
    rec.beams.assign(static_cast<std::size_t>(n), 0);

    // CSI acquisition. Reported vehicles get their optimal codebook beam; in
    // inferred mode the eMBB beams come from the reporters' angular CSI.
    std::vector<AngularCsi> csi_now(static_cast<std::size_t>(n));
    std::int64_t reports = 0;
    for (const auto& v : vehicles) {
        if (inferred && v.slice == Slice::embb) continue;
        const auto profile = links.at(v.serving_rsu, v.id).profile(ref_rb);
        rec.beams[static_cast<std::size_t>(v.id)] = argmax_beam(profile);
        if (inferred) csi_now[static_cast<std::size_t>(v.id)] = quantize_profile(profile, config_.quantizer_levels, config_.quantizer_range_db);
        ++reports;
    }
    if (inferred) {
        csi_history_.push_back(std::move(csi_now));
        while (static_cast<int>(csi_history_.size()) > config_.horizon) csi_history_.pop_front();
        const auto& stale = csi_history_.front();
        for (const auto& v : vehicles) {
            if (v.slice != Slice::embb) continue;
            const VehicleId r = *v.paired_reporter;
            InferenceRequest req{v.id, r, tti_, &stale[static_cast<std::size_t>(r)]};
            rec.beams[static_cast<std::size_t>(v.id)] = inferrer_->infer(req);
        }
    }
    ledger_.record_tti(reports, n);
    for (const auto& v : vehicles) links.at(v.serving_rsu, v.id).pin(rec.beams[static_cast<std::size_t>(v.id)]);

    // Per-RB estimates: current gain on the chosen beam, interference as
    // measured in the previous TTI.
    rec.quality.resize(static_cast<std::size_t>(n));
    for (const auto& v : vehicles) {
        auto& q = rec.quality[static_cast<std::size_t>(v.id)];
        const auto& link = links.at(v.serving_rsu, v.id);
        const auto& interference = last_interference_[static_cast<std::size_t>(v.id)];
        q.rate_bps.resize(static_cast<std::size_t>(config_.num_rb));
        q.bler.resize(static_cast<std::size_t>(config_.num_rb));
        for (int b = 0; b < config_.num_rb; ++b) {
            const auto i = static_cast<std::size_t>(b);
            const double sinr = link_.power_per_rb_w * link.gain(b, rec.beams[static_cast<std::size_t>(v.id)]) /
                                (link_.noise_w + interference[i]);
            q.rate_bps[i] = link_.rb_width_hz * std::log2(1.0 + sinr);
            q.bler[i] = bler(mi_per_rb(sinr, curve_), curve_);
        }
    }

    std::vector<SchedVehicle> urllc, embb;
    for (const auto& v : vehicles) (v.slice == Slice::urllc ? urllc : embb).push_back({v.id, v.serving_rsu});

    rec.grid = ResourceGrid(num_rsu, config_.num_rb);
    const UrllcPolicy policy{config_.rate_target_urllc_bps, config_.epsilon, config_.urllc_rate_margin};
    rec.urllc = allocate_urllc(urllc, rec.quality, tracker_, policy, rec.grid);
    allocate_embb_minmax(embb, rec.quality, tracker_, config_.rate_target_embb_bps, rec.grid);

    // Realised SINR and rate under this TTI's allocation.
    rec.rate_bps.assign(static_cast<std::size_t>(n), 0.0);
    rec.goodput_bits.assign(static_cast<std::size_t>(n), 0.0);
    for (const auto& v : vehicles) {
        const auto i = static_cast<std::size_t>(v.id);
        const auto report = sinr_per_rb(v.id, v.serving_rsu, rec.beams[i], rec.grid, rec.beams, links, link_);
        rec.rate_bps[i] = achievable_rate(v.id, v.serving_rsu, rec.grid, report, link_.rb_width_hz);
        last_interference_[i] = report.interference_w;

        const auto rbs = rec.grid.rbs_of(v.serving_rsu, v.id);
        if (!rbs.empty()) {
            std::vector<double> mi;
            for (int b : rbs) mi.push_back(mi_per_rb(report.sinr[static_cast<std::size_t>(b)], curve_));
            const double eff_sinr = sinr_for_mi(effective_mi(mi));
            const auto out = harq_step(harq_[i], eff_sinr, rec.rate_bps[i] * config_.tti_s, curve_, config_.max_retx,
                                       harq_rng_);
            rec.goodput_bits[i] = out.delivered_bits;
            delivered_bits_[i] += out.delivered_bits;
        }
    }
    for (const auto& v : vehicles) tracker_.update(v.id, rec.rate_bps[static_cast<std::size_t>(v.id)]);

    advance_mobility(vehicles, config_.tti_s, scenario_.geometry.road_length_m);
    ++tti_;
    return rec;
}

TtiRecord schedule_tti_perfect(Simulation& sim)
{
    if (sim.config().mode != CsiMode::perfect) throw ConfigError("simulation is not in perfect-CSI mode");
    return sim.step();
}

TtiRecord schedule_tti_inferred(Simulation& sim, const BeamInferrer& inferrer)
{
    if (sim.config().mode != CsiMode::inferred) throw ConfigError("simulation is not in inferred-CSI mode");
    sim.set_inferrer(&inferrer);
    return sim.step();
}

// --- traces ------------------------------------------------------------------

std::span<const std::uint8_t> Trace::reporter_features(std::int64_t tti, std::size_t embb_index) const
{
    const auto r = reporter_of.at(embb_index);
    const auto u = static_cast<std::size_t>(std::find(urllc_ids.begin(), urllc_ids.end(), r) - urllc_ids.begin());
    const auto offset = (static_cast<std::size_t>(tti) * urllc_ids.size() + u) * static_cast<std::size_t>(n_tx);
    return {urllc_features.data() + offset, static_cast<std::size_t>(n_tx)};
}

std::span<const std::uint8_t> Trace::embb_feature(std::int64_t tti, std::size_t embb_index) const
{
    const auto offset = (static_cast<std::size_t>(tti) * embb_ids.size() + embb_index) * static_cast<std::size_t>(n_tx);
    return {embb_features.data() + offset, static_cast<std::size_t>(n_tx)};
}

std::span<const float> Trace::gains(std::int64_t tti, std::size_t embb_index) const
{
    const auto offset = (static_cast<std::size_t>(tti) * embb_ids.size() + embb_index) * static_cast<std::size_t>(n_tx);
    return {embb_gains.data() + offset, static_cast<std::size_t>(n_tx)};
}

BeamIndex Trace::label(std::int64_t tti, std::size_t embb_index) const
{
    return embb_beam.at(static_cast<std::size_t>(tti) * embb_ids.size() + embb_index);
}

Trace generate_trace(const ScenarioConfig& config, std::int64_t num_ttis, std::string_view stream)
{
    if (num_ttis < 1) throw ContractViolation("generate_trace: need at least one TTI");
    Scenario sc = build_scenario(config);
    ScattererFading fading(config.num_scatterers, ScattererFading::correlation_for(config),
                           stream_seed(config.seed, stream));

    Trace tr;
    tr.n_tx = config.n_tx;
    tr.num_levels = config.quantizer_levels;
    tr.quantizer_range_db = config.quantizer_range_db;
    tr.num_ttis = num_ttis;
    for (const auto& v : sc.vehicles) {
        if (v.slice == Slice::urllc) {
            tr.urllc_ids.push_back(v.id);
        } else if (v.paired_reporter) {
            tr.embb_ids.push_back(v.id);
            tr.reporter_of.push_back(*v.paired_reporter);
        }
    }

    const int ref_rb = config.num_rb / 2;
    const auto nt = static_cast<std::size_t>(config.n_tx);
    tr.urllc_features.reserve(static_cast<std::size_t>(num_ttis) * tr.urllc_ids.size() * nt);
    tr.embb_features.reserve(static_cast<std::size_t>(num_ttis) * tr.embb_ids.size() * nt);
    tr.embb_gains.reserve(static_cast<std::size_t>(num_ttis) * tr.embb_ids.size() * nt);

    auto profile_of = [&](VehicleId id, std::int64_t t) {
        const auto& v = sc.vehicles[static_cast<std::size_t>(id)];
        LinkGains link(trace_paths(sc.geometry.rsu_positions_m[static_cast<std::size_t>(v.serving_rsu)], v.position_m,
                                   sc.geometry, fading, t, config.wavelength_m()),
                       config);
        return link.profile(ref_rb);
    };

    for (std::int64_t t = 0; t < num_ttis; ++t) {
        associate(sc.vehicles, sc.geometry);
        for (VehicleId u : tr.urllc_ids) {
            const auto q = quantize_profile(profile_of(u, t), config.quantizer_levels, config.quantizer_range_db);
            tr.urllc_features.insert(tr.urllc_features.end(), q.levels.begin(), q.levels.end());
        }
        for (VehicleId e : tr.embb_ids) {
            const auto g = profile_of(e, t);
            const auto q = quantize_profile(g, config.quantizer_levels, config.quantizer_range_db);
            tr.embb_features.insert(tr.embb_features.end(), q.levels.begin(), q.levels.end());
            for (double x : g) tr.embb_gains.push_back(static_cast<float>(x));
            tr.embb_beam.push_back(static_cast<std::uint8_t>(argmax_beam(g)));
        }
        advance_mobility(sc.vehicles, config.tti_s, sc.geometry.road_length_m);
    }
    return tr;
}

} // namespace vslice
