#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "vslice/analysis.hpp"

using namespace vslice;

namespace {

std::vector<double> uniform_discrete(Rng& rng, std::size_t n, int values)
{
    std::vector<double> x(n);
    for (auto& v : x) v = static_cast<double>(rng.below(static_cast<std::uint64_t>(values)));
    return x;
}

Eigen::MatrixXd gaussian(Rng& rng, int rows, int cols)
{
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

} // namespace

TEST_SUITE("analysis") {

TEST_CASE("MI of a uniform discrete sequence with itself is log(bins)")
{
    // Exactly equal counts per value keep the plug-in estimate exact.
    for (int bins : {4, 8, 16}) {
        std::vector<double> x;
        for (int rep = 0; rep < 50; ++rep)
            for (int v = 0; v < bins; ++v) x.push_back(v);
        Rng rng(1);
        std::shuffle(x.begin(), x.end(), rng);
        CHECK(std::abs(estimate_mi(x, x, bins) - std::log(bins)) < 1e-9);
    }
}

TEST_CASE("MI of independent samples is small")
{
    Rng rng(2);
    std::vector<double> x(10000), y(10000);
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    CHECK(estimate_mi(x, y, 8) < 0.05);
    CHECK(estimate_mi(x, y, 8) >= 0.0);
}

TEST_CASE("MI of a bivariate Gaussian against the closed form")
{
    Rng rng(3);
    const double rho = 0.9;
    const std::size_t n = 100000;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.normal();
        y[i] = rho * x[i] + std::sqrt(1.0 - rho * rho) * rng.normal();
    }
    const double truth = -0.5 * std::log(1.0 - rho * rho);
    const double est = estimate_mi(x, y, 32);
    CHECK(std::abs(est - truth) / truth < 0.15);
}

TEST_CASE("MI: a deterministic function carries more information than noise")
{
    Rng rng(4);
    const auto x = uniform_discrete(rng, 5000, 8);
    std::vector<double> fx(x.size()), y = uniform_discrete(rng, 5000, 8);
    std::transform(x.begin(), x.end(), fx.begin(), [](double v) { return 7.0 - v; });
    CHECK(estimate_mi(x, fx, 8) >= estimate_mi(x, y, 8));
}

TEST_CASE("MI input checks")
{
    const std::vector<double> a{1, 2, 3}, b{1, 2};
    CHECK_THROWS_AS(estimate_mi(a, b, 2), ContractViolation);
    CHECK_THROWS_AS(estimate_mi(std::vector<double>{1}, std::vector<double>{1}, 2), ContractViolation);
    CHECK_THROWS_AS(estimate_mi(a, a, 1), ContractViolation);
    const std::vector<double> c(10, 2.0);
    CHECK(estimate_mi(c, c, 4) == 0.0);
}

TEST_CASE("equiprobable edges follow order statistics")
{
    std::vector<double> s;
    for (int i = 0; i < 100; ++i) s.push_back(99 - i);
    const auto e = equiprobable_edges(s, 4);
    CHECK(e == std::vector<double>{25, 50, 75});
    CHECK(bin_of(10.0, e) == 0);
    CHECK(bin_of(25.0, e) == 1);
    CHECK(bin_of(99.0, e) == 3);
}

TEST_CASE("canonical correlation")
{
    Rng rng(5);
    const auto x = gaussian(rng, 2000, 4);
    CHECK(canonical_corr(x, x).correlation > 1.0 - 1e-6);

    Eigen::MatrixXd a(4, 4);
    a << 2, 1, 0, 0, 0, 1, 3, 0, 1, 0, 1, 1, 0, 0, 0, 5;
    const Eigen::MatrixXd y = x * a.transpose();
    CHECK(canonical_corr(x, y).correlation > 1.0 - 1e-6);
    CHECK(canonical_corr(y, x).correlation > 1.0 - 1e-6);

    const auto ind = gaussian(rng, 10000, 4);
    const auto ind2 = gaussian(rng, 10000, 4);
    const auto r = canonical_corr(ind, ind2);
    CHECK(r.correlation < 0.1);
    CHECK_FALSE(r.degenerate);

    const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(100, 3, 1.5);
    const auto d = canonical_corr(flat, gaussian(rng, 100, 2));
    CHECK(d.degenerate);
    CHECK(d.correlation == 0.0);

    CHECK_THROWS_AS(canonical_corr(gaussian(rng, 3, 4), gaussian(rng, 3, 4)), ContractViolation);
    CHECK_THROWS_AS(canonical_corr(gaussian(rng, 30, 2), gaussian(rng, 20, 2)), ContractViolation);
}

TEST_CASE("canonical correlation is invariant under invertible maps")
{
    Rng rng(6);
    const auto x = gaussian(rng, 3000, 3);
    const Eigen::MatrixXd y = x.leftCols(2) + 0.7 * gaussian(rng, 3000, 2);
    const double base = canonical_corr(x, y).correlation;
    CHECK(base > 0.0);
    CHECK(base < 1.0);
    Eigen::MatrixXd a(3, 3);
    a << 1, 2, 0, 0, 1, 0, 4, 0, 2;
    Eigen::MatrixXd b(2, 2);
    b << 0, 3, -1, 1;
    const double mapped = canonical_corr(x * a, y * b).correlation;
    CHECK(std::abs(mapped - base) < 1e-6);
}

TEST_CASE("ccdf basics")
{
    const auto one = ccdf(std::vector<double>{0.4});
    CHECK(one(0.39) == 1.0);
    CHECK(one(0.4) == 0.0);
    const auto two = ccdf(std::vector<double>{0.0, 1.0});
    CHECK(two(0.5) == 0.5);
    CHECK_THROWS_AS(ccdf(std::vector<double>{}), ContractViolation);
}

TEST_CASE("ccdf quantiles match sorted-index order statistics")
{
    Rng rng(7);
    std::vector<double> xs(1234);
    for (auto& v : xs) v = rng.uniform();
    const auto c = ccdf(xs);
    auto sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    for (double p : {0.1, 0.5, 0.9, 0.99, 1.0}) {
        const auto k = static_cast<std::size_t>(std::ceil(p * 1234.0));
        CHECK(c.quantile(p) == sorted[k - 1]);
        // Defining property: P(X <= q) >= p and P(X < q) < p.
        const double below_or_at = 1.0 - c(c.quantile(p));
        CHECK(below_or_at >= p - 1e-12);
    }
    const std::vector<double> ten{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    CHECK(ccdf(ten).quantile(0.9) == 8.0);
    CHECK_THROWS_AS(c.quantile(0.0), ContractViolation);
}

TEST_CASE("ccdf is monotone, bounded and integrates to the mean")
{
    Rng rng(8);
    std::vector<double> xs(500);
    for (auto& v : xs) v = rng.bernoulli(0.3) ? 0.0 : rng.uniform(0.0, 2.0);
    const auto c = ccdf(xs);
    const auto pts = c.points();
    double prev = 1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts[i].second <= prev);
        CHECK(pts[i].second >= 0.0);
        if (i > 0) CHECK(pts[i].first > pts[i - 1].first);
        CHECK(pts[i].second == c(pts[i].first));
        prev = pts[i].second;
    }
    CHECK(pts.back().second == 0.0);
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / 500.0;
    CHECK(std::abs(c.area() - mean) < 1e-9);
}

TEST_CASE("aggregate")
{
    ScenarioConfig c;
    std::vector<VehicleState> vs(4);
    for (int i = 0; i < 4; ++i) {
        vs[static_cast<std::size_t>(i)].id = i;
        vs[static_cast<std::size_t>(i)].slice = i < 2 ? Slice::urllc : Slice::embb;
    }
    RateTracker t(4, {c.rate_target_urllc_bps, c.rate_target_embb_bps});
    for (int k = 0; k < 10; ++k) {
        t.update(0, 200e3);
        t.update(1, k < 5 ? 0.0 : 1e6);
        t.update(2, 2e6);
        t.update(3, 4e6);
    }
    OverheadLedger l;
    for (int k = 0; k < 10; ++k) l.record_tti(2, 4);
    const auto m = aggregate(t, l, vs, c);
    CHECK(m.mean_embb_rate_bps == doctest::Approx(3e6));
    CHECK(m.std_embb_rate_bps == doctest::Approx(1e6));
    REQUIRE(m.embb_satisfaction.has_value());
    CHECK(*m.embb_satisfaction == 1.0);
    REQUIRE(m.urllc_violation.has_value());
    // Vehicle 1: running means 0 for 5 TTIs, then 1/6, 2/7, ... Mbps, all above 128k.
    CHECK(*m.urllc_violation == doctest::Approx(0.25));
    CHECK(m.overhead_reports == 20);
    CHECK(m.overhead_full_reports == 40);
    CHECK(m.overhead_reduction == 0.5);

    const std::vector<VehicleState> only_urllc(vs.begin(), vs.begin() + 2);
    const auto u = aggregate(t, l, only_urllc, c);
    CHECK_FALSE(u.embb_satisfaction.has_value());
    CHECK(u.mean_embb_rate_bps == 0.0);
}

TEST_CASE("angular grouping")
{
    std::vector<std::uint8_t> levels(64, 0);
    levels[5] = 9;
    levels[37] = 15;
    levels[38] = 3;
    CHECK(dominant_group(levels, 4) == 2);
    CHECK(dominant_group(levels, 64) == 37);
    const auto g = grouped_profile(levels, 8);
    CHECK(g.size() == 8);
    CHECK(g[0] == 9.0);
    CHECK(g[4] == 15.0);
    CHECK(g[1] == 0.0);
    CHECK_THROWS_AS(grouped_profile(levels, 7), ContractViolation);
}

}
