#include <doctest.h>

#include <set>

#include "vslice/common.hpp"

using namespace vslice;

TEST_SUITE("common") {

TEST_CASE("mode names round-trip")
{
    CHECK(parse_mode("perfect") == CsiMode::perfect);
    CHECK(parse_mode("inferred") == CsiMode::inferred);
    CHECK(to_string(parse_mode(to_string(CsiMode::inferred))) == "inferred");
    CHECK_THROWS_AS(parse_mode("Perfect"), ConfigError);
    CHECK(to_string(Slice::urllc) == "urllc");
    CHECK(to_string(Slice::embb) == "embb");
}

TEST_CASE("named streams are distinct and reproducible")
{
    CHECK(stream_seed(1, "channel") == stream_seed(1, "channel"));
    std::set<std::uint64_t> seeds;
    for (auto name : {"geometry", "mobility", "channel", "training", "harq", "analysis"})
        for (std::uint64_t seed = 0; seed < 4; ++seed)
            for (std::uint64_t idx = 0; idx < 3; ++idx) seeds.insert(stream_seed(seed, name, idx));
    CHECK(seeds.size() == 6 * 4 * 3);

    Rng a(7, "geometry"), b(7, "geometry"), c(7, "channel");
    bool differs = false;
    for (int i = 0; i < 16; ++i) {
        const auto x = a(), y = b(), z = c();
        CHECK(x == y);
        differs |= x != z;
    }
    CHECK(differs);
}

TEST_CASE("uniform draws lie in [0, 1) with the right mean")
{
    Rng rng(3);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    // Standard error of the mean is sqrt(1/12/n) ~ 9e-4.
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.004));
}

TEST_CASE("below is unbiased over a small range")
{
    Rng rng(11);
    std::vector<int> counts(6, 0);
    const int n = 60000;
    for (int i = 0; i < n; ++i) ++counts[rng.below(6)];
    for (int c : counts) CHECK(std::abs(c - n / 6) < 5 * std::sqrt(n / 6.0));
    CHECK_THROWS_AS(rng.below(0), ContractViolation);
}

TEST_CASE("normal and complex normal moments")
{
    Rng rng(5);
    const int n = 200000;
    double m = 0.0, m2 = 0.0, p = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        m += x;
        m2 += x * x;
        p += std::norm(rng.complex_normal());
    }
    CHECK(std::abs(m / n) < 0.01);
    CHECK(m2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(p / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("distance is Euclidean")
{
    CHECK(distance({0, 0}, {3, 4}) == 5.0);
    CHECK(distance({1, 1}, {1, 1}) == 0.0);
}

}
