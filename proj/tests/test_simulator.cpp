#include <doctest.h>

#include <algorithm>
#include <map>

#include "vslice/simulator.hpp"

using namespace vslice;

namespace {

ScenarioConfig small(CsiMode mode = CsiMode::perfect)
{
    ScenarioConfig c;
    c.mode = mode;
    c.seed = 3;
    return c;
}

// Records what the scheduler hands to inference.
struct RecordingInferrer : BeamInferrer {
    mutable std::map<std::pair<std::int64_t, VehicleId>, std::vector<std::uint8_t>> seen;
    BeamIndex infer(const InferenceRequest& r) const override
    {
        seen[{r.tti, r.embb}] = r.reporter_csi->levels;
        return 0;
    }
};

// Picks the weakest beam of the eMBB vehicle's serving link.
struct WorstInferrer : BeamInferrer {
    const Simulation* sim = nullptr;
    BeamIndex infer(const InferenceRequest& r) const override
    {
        const auto g = sim->serving_profile(r.embb);
        return static_cast<BeamIndex>(std::min_element(g.begin(), g.end()) - g.begin());
    }
};

struct FixedInferrer : BeamInferrer {
    BeamIndex beam = 0;
    BeamIndex infer(const InferenceRequest&) const override { return beam; }
};

} // namespace

TEST_SUITE("simulator") {

TEST_CASE("same seed, same records")
{
    Simulation a(small()), b(small());
    for (int t = 0; t < 30; ++t) {
        const auto ra = a.step(), rb = b.step();
        CHECK(ra.grid == rb.grid);
        CHECK(ra.rate_bps == rb.rate_bps);
        CHECK(ra.goodput_bits == rb.goodput_bits);
        CHECK(ra.beams == rb.beams);
    }
    CHECK(a.delivered_bits() == b.delivered_bits());
}

TEST_CASE("grids are orthogonal and only serve associated vehicles")
{
    auto c = small();
    c.num_urllc = 10;
    c.num_embb = 10;
    c.inter_vehicle_distance_m = 20.0;
    Simulation sim(c);
    for (int t = 0; t < 50; ++t) {
        const auto rec = sim.step();
        int held = 0;
        for (RsuId s = 0; s < c.num_rsu; ++s)
            for (int b = 0; b < c.num_rb; ++b) {
                const VehicleId v = rec.grid.holder(s, b);
                if (v == kNoVehicle) continue;
                ++held;
                CHECK(rec.vehicles[static_cast<std::size_t>(v)].serving_rsu == s);
            }
        CHECK(held == rec.grid.count_assigned());
        for (const auto& v : rec.vehicles)
            if (rec.grid.rbs_of(v.serving_rsu, v.id).empty()) CHECK(rec.rate_bps[static_cast<std::size_t>(v.id)] == 0.0);
    }
}

TEST_CASE("perfect mode uses the optimal beam of every vehicle")
{
    Simulation sim(small());
    for (int t = 0; t < 5; ++t) {
        std::vector<BeamIndex> expected;
        for (const auto& v : sim.vehicles()) expected.push_back(sim.true_beam(v.id));
        CHECK(sim.step().beams == expected);
    }
}

TEST_CASE("overhead: all vehicles report in perfect mode, URLLC only when inferring")
{
    Simulation perfect(small());
    Simulation inferred(small(CsiMode::inferred));
    const OracleInferrer oracle(inferred);
    for (int t = 0; t < 20; ++t) {
        schedule_tti_perfect(perfect);
        schedule_tti_inferred(inferred, oracle);
    }
    CHECK(perfect.ledger().total_reports() == 160);
    CHECK(perfect.ledger().reduction() == 0.0);
    CHECK(inferred.ledger().total_reports() == 80);
    CHECK(inferred.ledger().total_full_reports() == 160);
    CHECK(inferred.ledger().reduction() == 0.5);
}

TEST_CASE("oracle inference reproduces perfect-mode grids")
{
    Simulation perfect(small());
    Simulation inferred(small(CsiMode::inferred));
    const OracleInferrer oracle(inferred);
    for (int t = 0; t < 200; ++t) {
        const auto p = schedule_tti_perfect(perfect);
        const auto q = schedule_tti_inferred(inferred, oracle);
        REQUIRE(p.grid == q.grid);
        CHECK(p.rate_bps == q.rate_bps);
    }
}

TEST_CASE("without eMBB vehicles the modes coincide")
{
    auto c = small();
    c.num_embb = 0;
    Simulation perfect(c);
    c.mode = CsiMode::inferred;
    Simulation inferred(c);
    const FixedInferrer unused;
    for (int t = 0; t < 50; ++t) CHECK(schedule_tti_perfect(perfect).grid == schedule_tti_inferred(inferred, unused).grid);
    CHECK(inferred.ledger().reduction() == 0.0);
}

TEST_CASE("a wrong beam changes the eMBB allocation outcome")
{
    Simulation perfect(small());
    Simulation inferred(small(CsiMode::inferred));
    WorstInferrer worst;
    worst.sim = &inferred;
    double rate_p = 0.0, rate_i = 0.0;
    for (int t = 0; t < 50; ++t) {
        const auto p = schedule_tti_perfect(perfect);
        const auto q = schedule_tti_inferred(inferred, worst);
        for (const auto& v : p.vehicles)
            if (v.slice == Slice::embb) {
                rate_p += p.rate_bps[static_cast<std::size_t>(v.id)];
                rate_i += q.rate_bps[static_cast<std::size_t>(v.id)];
            }
    }
    CHECK(rate_i < rate_p);
}

TEST_CASE("inferred mode configuration errors")
{
    auto c = small(CsiMode::inferred);
    c.num_urllc = 0;
    c.num_embb = 1;
    CHECK_THROWS_AS(Simulation{c}, ConfigError);

    Simulation sim(small(CsiMode::inferred));
    CHECK_THROWS_AS(sim.step(), ConfigError);
    CHECK_THROWS_AS(schedule_tti_perfect(sim), ConfigError);
    Simulation perfect(small());
    const FixedInferrer f;
    CHECK_THROWS_AS(schedule_tti_inferred(perfect, f), ConfigError);
}

TEST_CASE("the horizon delays the reporter CSI handed to inference")
{
    auto c = small(CsiMode::inferred);
    RecordingInferrer now, late;
    Simulation s1(c);
    s1.set_inferrer(&now);
    c.horizon = 3;
    Simulation s3(c);
    s3.set_inferrer(&late);
    for (int t = 0; t < 12; ++t) {
        s1.step();
        s3.step();
    }
    for (const auto& [key, levels] : late.seen) {
        const auto source = std::max<std::int64_t>(0, key.first - 2);
        CHECK(levels == now.seen.at({source, key.second}));
    }
    CHECK(late.seen.size() == 12 * 4);
}

TEST_CASE("single URLLC vehicle meets its target from the first TTI")
{
    auto c = small();
    c.num_rsu = 1;
    c.num_urllc = 1;
    c.num_embb = 0;
    Simulation sim(c);
    const auto first = sim.step();
    CHECK(first.urllc.at(0).satisfied);
    CHECK(sim.tracker().running_mean(0) > c.rate_target_urllc_bps);
    for (int t = 1; t < 200; ++t) sim.step();
    CHECK(sim.tracker().violation_count(0, c.rate_target_urllc_bps) == 0);
}

TEST_CASE("goodput never exceeds the scheduled bits")
{
    Simulation sim(small());
    std::vector<double> scheduled(8, 0.0);
    for (int t = 0; t < 300; ++t) {
        const auto rec = sim.step();
        for (std::size_t v = 0; v < 8; ++v) scheduled[v] += rec.rate_bps[v] * 1e-3;
    }
    for (std::size_t v = 0; v < 8; ++v) {
        CHECK(sim.delivered_bits()[v] <= scheduled[v] * (1 + 1e-12));
        CHECK(sim.delivered_bits()[v] > 0.0);
    }
}

TEST_CASE("trace labels and features match explicit channel matrices")
{
    auto c = small();
    const std::int64_t T = 40;
    const auto tr = generate_trace(c, T, "training");
    CHECK(tr.num_ttis == T);
    CHECK(tr.embb_ids.size() == 4);
    CHECK(tr.urllc_ids.size() == 4);
    CHECK(tr.embb_beam.size() == static_cast<std::size_t>(T) * 4);

    auto sc = build_scenario(c);
    const ScattererFading fading(c.num_scatterers, ScattererFading::correlation_for(c), stream_seed(c.seed, "training"));
    const auto cb = dft_codebook(c.n_tx);
    for (std::int64_t t = 0; t < T; ++t) {
        associate(sc.vehicles, sc.geometry);
        for (std::size_t e = 0; e < tr.embb_ids.size(); ++e) {
            const auto& v = sc.vehicles[static_cast<std::size_t>(tr.embb_ids[e])];
            const auto h = realize_channel(v.serving_rsu, v, sc.geometry, c.num_rb / 2, t, fading, c);
            CHECK(tr.label(t, e) == optimal_beam(h.entries, cb));
            const auto& r = sc.vehicles[static_cast<std::size_t>(tr.reporter_of[e])];
            const auto hr = realize_channel(r.serving_rsu, r, sc.geometry, c.num_rb / 2, t, fading, c);
            const auto csi = angular_transform(hr.entries, cb);
            const auto got = tr.reporter_features(t, e);
            CHECK(std::equal(got.begin(), got.end(), csi.levels.begin()));
        }
        advance_mobility(sc.vehicles, c.tti_s, sc.geometry.road_length_m);
    }
    CHECK_THROWS_AS(generate_trace(c, 0), ContractViolation);
}

TEST_CASE("trace streams are independent of the simulation stream")
{
    auto c = small();
    const auto a = generate_trace(c, 20, "training");
    const auto b = generate_trace(c, 20, "analysis");
    const auto a2 = generate_trace(c, 20, "training");
    CHECK(a.embb_gains == a2.embb_gains);
    CHECK(a.embb_gains != b.embb_gains);
}

}
