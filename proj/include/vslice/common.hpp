// SPDX-License-Identifier: Apache-2.0
//
// Shared vocabulary types, error classes and seeded random streams.

#ifndef VSLICE_COMMON_HPP
#define VSLICE_COMMON_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vslice {

using Complex = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = std::numbers::pi;

using VehicleId = int;
using RsuId = int;
using BeamIndex = int;

inline constexpr VehicleId kNoVehicle = -1;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

enum class Slice { urllc, embb };
enum class CsiMode { perfect, inferred };

std::string_view to_string(Slice s);
std::string_view to_string(CsiMode m);
CsiMode parse_mode(std::string_view text);

/// Invalid user-supplied configuration (bad values, missing pairing, unknown keys).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. distance <= 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Caller broke a precondition (shape mismatch, empty input).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Random streams. Every consumer draws from its own named sub-stream so that
// adding draws in one place never shifts another. Distribution helpers are
// written out here because the std:: distributions are not bit-stable across
// standard library implementations.

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t stream_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0)
        : engine_(stream_seed(seed, stream, index)) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    double normal();
    /// Circularly-symmetric complex Gaussian with unit variance.
    Complex complex_normal();
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace vslice

#endif
