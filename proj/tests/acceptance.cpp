// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any
// fails. Heavier checks (epsilon and horizon trends) take a few minutes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vslice/harness.hpp"
#include "vslice/simulator.hpp"

using namespace vslice;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Eigen::MatrixXcd random_channel(Rng& rng, int rows, int cols)
{
    Eigen::MatrixXcd h(rows, cols);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = rng.complex_normal();
    return h;
}

Outcome codebook_unitarity()
{
    double worst = 0.0;
    for (int n : {1, 2, 4, 8, 64}) {
        const auto w = dft_codebook(n).columns;
        const Eigen::MatrixXcd e = w.adjoint() * w - Eigen::MatrixXcd::Identity(n, n);
        worst = std::max(worst, e.cwiseAbs().maxCoeff());
    }
    return {worst < 1e-9, fmt("max |W^H W - I| = %.3g", worst)};
}

Outcome beam_selection()
{
    const auto cb = dft_codebook(64);
    Rng rng(101);
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto h = random_channel(rng, 8, 64);
        int best = 0;
        double best_gain = -1.0;
        for (int k = 0; k < 64; ++k) {
            double g = 0.0;
            for (int i = 0; i < 8; ++i) {
                Complex acc = 0.0;
                for (int j = 0; j < 64; ++j) acc += h(i, j) * cb.columns(j, k);
                g += std::norm(acc);
            }
            if (g > best_gain) {
                best_gain = g;
                best = k;
            }
        }
        mismatches += optimal_beam(h, cb) != best;
    }
    return {mismatches == 0, fmt("%.0f mismatches in 1000 channels", mismatches)};
}

Outcome rate_formula()
{
    Rng rng(102);
    const double omega = 200e3;
    double worst = 0.0;
    bool zero_ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const int num_rb = 1 + static_cast<int>(rng.below(50));
        ResourceGrid grid(2, num_rb);
        SinrReport s;
        for (int b = 0; b < num_rb; ++b) {
            s.sinr.push_back(std::exp(rng.uniform(-8.0, 10.0)));
            s.interference_w.push_back(0.0);
            for (RsuId r = 0; r < 2; ++r)
                if (rng.bernoulli(0.5)) grid.assign(r, b, static_cast<VehicleId>(rng.below(4)));
        }
        for (VehicleId v = 0; v < 4; ++v) {
            double ref = 0.0;
            for (int b = 0; b < num_rb; ++b)
                if (grid.holder(1, b) == v) ref += omega * std::log2(1.0 + s.sinr[static_cast<std::size_t>(b)]);
            const double got = achievable_rate(v, 1, grid, s, omega);
            if (ref > 0.0) worst = std::max(worst, std::abs(got - ref) / ref);
            else if (got != 0.0) worst = std::numeric_limits<double>::infinity();
            zero_ok = zero_ok && achievable_rate(v, 1, grid, s, 0.0) == 0.0;
        }
    }
    return {worst <= 1e-12 && zero_ok, fmt("max relative error %.3g, zero bandwidth gives 0: ", worst) +
                                           (zero_ok ? "yes" : "no")};
}

Outcome scheduler_invariants()
{
    ScenarioConfig c;
    Simulation sim(c);
    std::int64_t orthogonality = 0, priority = 0, embb_rbs = 0;
    for (int t = 0; t < 10000; ++t) {
        const auto rec = sim.step();
        int held = 0;
        for (const auto& v : rec.vehicles)
            for (RsuId s = 0; s < c.num_rsu; ++s) {
                const auto rbs = rec.grid.rbs_of(s, v.id);
                held += static_cast<int>(rbs.size());
                if (s != v.serving_rsu) orthogonality += static_cast<std::int64_t>(rbs.size());
            }
        if (held != rec.grid.count_assigned()) ++orthogonality;

        for (const auto& u : rec.urllc) {
            if (u.satisfied) continue;
            const auto& uv = rec.vehicles[static_cast<std::size_t>(u.id)];
            const auto& q = rec.quality[static_cast<std::size_t>(u.id)];
            for (int b = 0; b < c.num_rb; ++b) {
                const VehicleId h = rec.grid.holder(uv.serving_rsu, b);
                if (h == kNoVehicle || rec.vehicles[static_cast<std::size_t>(h)].slice != Slice::embb) continue;
                if (q.expected(b) > 0.0) ++priority;
            }
        }
        for (const auto& v : rec.vehicles)
            if (v.slice == Slice::embb)
                embb_rbs += static_cast<std::int64_t>(rec.grid.rbs_of(v.serving_rsu, v.id).size());
    }
    return {orthogonality == 0 && priority == 0 && embb_rbs > 0,
            fmt("10000 TTIs: %.0f orthogonality and %.0f priority violations, %.0f eMBB RB grants",
                static_cast<double>(orthogonality), static_cast<double>(priority), static_cast<double>(embb_rbs))};
}

Outcome oracle_equivalence()
{
    ScenarioConfig c;
    Simulation perfect(c);
    c.mode = CsiMode::inferred;
    Simulation inferred(c);
    const OracleInferrer oracle(inferred);
    int differing = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto p = schedule_tti_perfect(perfect);
        const auto q = schedule_tti_inferred(inferred, oracle);
        differing += !(p.grid == q.grid) || p.rate_bps != q.rate_bps;
    }
    return {differing == 0, fmt("%.0f of 1000 TTIs differ", differing)};
}

double min_abs_preactivation(const MlpModel& m, const Eigen::MatrixXd& x)
{
    double smallest = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd a = x;
    for (int l = 0; l + 1 < m.num_layers(); ++l) {
        const Eigen::MatrixXd z = (m.weight(l) * a).colwise() + m.bias(l);
        smallest = std::min(smallest, z.cwiseAbs().minCoeff());
        a = z.cwiseMax(0.0);
    }
    return smallest;
}

Outcome gradient_check()
{
    Rng rng(103);
    double worst = 0.0;
    int draws = 0;
    std::int64_t inactive = 0;
    while (draws < 100) {
        auto m = MlpModel::glorot({10, 12, 8, 6}, rng);
        for (auto& p : m.parameters()) p += rng.uniform(-0.3, 0.3);
        Eigen::MatrixXd x(10, 4);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
        std::vector<int> labels;
        for (int i = 0; i < 4; ++i) labels.push_back(static_cast<int>(rng.below(6)));
        if (min_abs_preactivation(m, x) < 1e-3) continue;
        ++draws;
        const Eigen::MatrixXd z = (m.weight(0) * x).colwise() + m.bias(0);
        inactive += (z.array() < 0.0).count();

        std::vector<double> grad;
        m.loss_and_gradient(x, labels, grad);
        // Perturbations stay far inside the 1e-3 margin to the ReLU kinks.
        const double step = 1e-5;
        for (std::size_t i = 0; i < grad.size(); ++i) {
            const double keep = m.parameters()[i];
            m.parameters()[i] = keep + step;
            const double up = m.loss(x, labels);
            m.parameters()[i] = keep - step;
            const double down = m.loss(x, labels);
            m.parameters()[i] = keep;
            const double numeric = (up - down) / (2.0 * step);
            const double scale = std::max(std::abs(numeric), std::abs(grad[i]));
            if (scale > 1e-6) worst = std::max(worst, std::abs(numeric - grad[i]) / scale);
            else if (std::abs(numeric - grad[i]) > 1e-9) worst = std::numeric_limits<double>::infinity();
        }
    }
    return {worst < 1e-4 && inactive > 0,
            fmt("max relative error %.3g over 100 draws, %.0f inactive first-layer units", worst,
                static_cast<double>(inactive))};
}

Outcome loss_semantics()
{
    const auto cb = dft_codebook(64);
    Rng rng(104);
    bool optimal_zero = true, in_range = true;
    for (int trial = 0; trial < 10000; ++trial) {
        const auto h = random_channel(rng, 8, 64);
        optimal_zero = optimal_zero && beamforming_loss(optimal_beam(h, cb), h, cb) == 0.0;
        const double l = beamforming_loss(static_cast<BeamIndex>(rng.below(64)), h, cb);
        in_range = in_range && l >= 0.0 && l <= 1.0;
    }
    std::vector<double> gains(64);
    for (auto& g : gains) g = rng.uniform(0.1, 1.0);
    gains[17] = 0.0;
    const bool zero_gain = beamforming_loss(17, gains) == 1.0;
    return {optimal_zero && in_range && zero_gain,
            std::string("L(optimal) = 0: ") + (optimal_zero ? "yes" : "no") + ", L in [0,1] on 10000 cases: " +
                (in_range ? "yes" : "no") + ", zero-gain beam gives 1: " + (zero_gain ? "yes" : "no")};
}

Outcome overhead_accounting()
{
    std::string detail;
    bool pass = true;
    for (int n : {4, 12}) {
        ScenarioConfig c;
        c.mode = CsiMode::inferred;
        c.num_urllc = n;
        c.num_embb = n;
        Simulation sim(c);
        const OracleInferrer oracle(sim);
        for (int t = 0; t < 100; ++t) schedule_tti_inferred(sim, oracle);
        const double r = sim.ledger().reduction();
        pass = pass && r == 0.5;
        detail += fmt("%.0f+%.0f vehicles: reduction %.17g; ", n, n, r);
    }
    detail.resize(detail.size() - 2);
    return {pass, detail};
}

// Mean of a metric over seeds at each (distance, epsilon).
std::map<std::pair<double, double>, double> seed_mean(const std::vector<MetricsRow>& rows,
                                                      const std::function<double(const MetricsRow&)>& f)
{
    std::map<std::pair<double, double>, double> sum;
    std::map<std::pair<double, double>, int> n;
    for (const auto& r : rows) {
        sum[{r.point.distance_m, r.point.epsilon}] += f(r);
        ++n[{r.point.distance_m, r.point.epsilon}];
    }
    for (auto& [k, v] : sum) v /= n[k];
    return sum;
}

Outcome epsilon_trend()
{
    auto plan = plan_from_json(nlohmann::json{
        {"base", {{"num_urllc", 20}, {"num_embb", 20}, {"inter_vehicle_distance_m", 20.0}}},
        {"sweep", {{"epsilon", {0.1, 0.01, 0.001, 0.0001}}, {"inter_vehicle_distance_m", {20.0, 6.25}}}},
        {"seeds", {1, 2, 3}},
        {"num_ttis", 1000},
    });
    const auto res = run_plan(plan, {true, false, false});
    const auto sat = seed_mean(res.metrics, [](const MetricsRow& r) { return r.summary.embb_satisfaction.value_or(0.0); });
    const auto sd = seed_mean(res.metrics, [](const MetricsRow& r) { return r.summary.std_embb_rate_bps; });

    bool pass = true;
    std::string detail;
    for (double d : {20.0, 6.25}) {
        detail += fmt("d=%gm sat/std(Mbps):", d);
        for (std::size_t i = 0; i < plan.epsilons.size(); ++i) {
            const double e = plan.epsilons[i];
            detail += fmt(" %g:%.3f/%.3f", e, sat.at({d, e}), sd.at({d, e}) / 1e6);
            if (i == 0) continue;
            const double prev = plan.epsilons[i - 1];
            if (d == 20.0 && (sat.at({d, e}) > sat.at({d, prev}) || sd.at({d, e}) < sd.at({d, prev}))) pass = false;
        }
        detail += "; ";
    }
    for (double e : plan.epsilons)
        if (sat.at({6.25, e}) > sat.at({20.0, e})) pass = false;
    detail.resize(detail.size() - 2);
    return {pass, detail};
}

Outcome horizon_trend()
{
    auto plan = plan_from_json(nlohmann::json{
        {"sweep", {{"mode", {"inferred"}}, {"horizon", {1, 2, 3}}}},
        {"seeds", {1, 2, 3}},
        {"training", {{"trace_ttis", 12500}, {"epochs", 20}, {"learning_rate", 1e-4}}},
    });
    const auto res = run_plan(plan, {false, true, false});
    std::vector<double> p90, exact;
    std::string detail;
    for (int h : plan.horizons) {
        const CcdfCurve curve(res.losses.at(h));
        const auto& s = curve.sorted();
        p90.push_back(curve.quantile(0.9));
        exact.push_back(static_cast<double>(std::count(s.begin(), s.end(), 0.0)) / static_cast<double>(s.size()));
        detail += fmt("h%.0f p90 %.4f exact %.4f; ", h, p90.back(), exact.back());
    }
    bool pass = true;
    for (std::size_t i = 1; i < p90.size(); ++i)
        pass = pass && p90[i] >= p90[i - 1] && exact[i] <= exact[i - 1];
    detail += fmt("%.0f test samples per horizon", static_cast<double>(res.losses.at(1).size()));
    return {pass, detail};
}

std::vector<double> uniform_discrete(Rng& rng, std::size_t n, int levels)
{
    std::vector<double> x(n);
    for (auto& v : x) v = static_cast<double>(rng.below(static_cast<std::uint64_t>(levels)));
    return x;
}

Outcome statistics()
{
    Rng rng(105);
    const int bins = 8;
    std::vector<double> balanced(10000);
    for (std::size_t i = 0; i < balanced.size(); ++i) balanced[i] = static_cast<double>(i % bins);
    const double identical = estimate_mi(balanced, balanced, bins);
    const double identical_err = std::abs(identical - std::log(static_cast<double>(bins)));

    const auto x = uniform_discrete(rng, 10000, bins), y = uniform_discrete(rng, 10000, bins);
    const double independent = estimate_mi(x, y, bins);

    Eigen::MatrixXd m(500, 3);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    const double cca = canonical_corr(m, m).correlation;

    const double rho = 0.9;
    std::vector<double> gx(100000), gy(100000);
    for (std::size_t i = 0; i < gx.size(); ++i) {
        gx[i] = rng.normal();
        gy[i] = rho * gx[i] + std::sqrt(1.0 - rho * rho) * rng.normal();
    }
    const double truth = -0.5 * std::log(1.0 - rho * rho);
    const double gauss_err = std::abs(estimate_mi(gx, gy, 32) - truth) / truth;

    return {identical_err < 1e-9 && independent < 0.05 && cca > 1.0 - 1e-6 && gauss_err < 0.15,
            fmt("|MI - log 8| = %.3g, independent MI %.4f, CCA(X,X) = %.10f, Gaussian MI rel. error %.3f",
                identical_err, independent, cca, gauss_err)};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome reproducibility()
{
    auto plan = plan_from_json(nlohmann::json{
        {"sweep", {{"mode", {"perfect", "inferred"}}, {"epsilon", {0.1, 0.001}}}},
        {"seeds", {1, 2}},
        {"num_ttis", 500},
        {"training", {{"trace_ttis", 500}, {"epochs", 2}}},
    });
    const auto root = std::filesystem::temp_directory_path() / "vslice_acceptance_repro";
    std::filesystem::remove_all(root);
    std::string bodies[2];
    for (int i = 0; i < 2; ++i) {
        plan.output_dir = root / std::to_string(i);
        if (run(plan, {true, false, false}) != 0) return {false, "run failed"};
        bodies[i] = slurp(plan.output_dir / "metrics.csv");
    }
    std::filesystem::remove_all(root);
    const bool same = !bodies[0].empty() && bodies[0] == bodies[1];
    return {same, fmt("metrics.csv %.0f bytes, identical: ", static_cast<double>(bodies[0].size())) +
                      (same ? "yes" : "no")};
}

} // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"codebook unitarity", codebook_unitarity},
        {"beam selection vs exhaustive search", beam_selection},
        {"rate formula vs per-RB recomputation", rate_formula},
        {"scheduler invariants over 10^4 TTIs", scheduler_invariants},
        {"oracle inference equals perfect CSI", oracle_equivalence},
        {"MLP gradient check", gradient_check},
        {"beamforming loss semantics", loss_semantics},
        {"overhead reduction with equal slices", overhead_accounting},
        {"epsilon trend", epsilon_trend},
        {"prediction horizon trend", horizon_trend},
        {"statistics", statistics},
        {"reproducible metrics.csv", reproducibility},
    };
    std::vector<bool> selected(criteria.size(), argc < 2);
    for (int a = 1; a < argc; ++a) {
        const auto k = static_cast<std::size_t>(std::atoi(argv[a]));
        if (k >= 1 && k <= criteria.size()) selected[k - 1] = true;
    }
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected[i]) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
