// SPDX-License-Identifier: Apache-2.0

#include "vslice/common.hpp"

namespace vslice {

std::string_view to_string(Slice s) { return s == Slice::urllc ? "urllc" : "embb"; }

std::string_view to_string(CsiMode m) { return m == CsiMode::perfect ? "perfect" : "inferred"; }

CsiMode parse_mode(std::string_view text)
{
    if (text == "perfect") return CsiMode::perfect;
    if (text == "inferred") return CsiMode::inferred;
    throw ConfigError("unknown mode '" + std::string(text) + "' (expected perfect|inferred)");
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::string_view name, std::uint64_t index)
{
    // FNV-1a over the stream name, then mixed with seed and index.
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return splitmix64(splitmix64(seed ^ h) + index);
}

std::uint64_t Rng::below(std::uint64_t n)
{
    if (n == 0) throw ContractViolation("Rng::below: n must be positive");
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
}

Complex Rng::complex_normal()
{
    const double re = normal();
    const double im = normal();
    return {re * std::sqrt(0.5), im * std::sqrt(0.5)};
}

} // namespace vslice
