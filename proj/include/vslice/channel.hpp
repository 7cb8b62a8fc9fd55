// SPDX-License-Identifier: Apache-2.0
//
// Geometry-based MIMO channel: a line-of-sight ray plus one single-bounce
// ray per common scatterer, each carrying a ULA steering vector at the RSU
// (N_t elements) and the vehicle (N_r elements).
//
// Both arrays lie along the road, so the spatial frequency of a ray is the
// x-component of its unit direction: (x_target - x_rsu) / d at the RSU and
// (x_source - x_vehicle) / d at the vehicle.

#ifndef VSLICE_CHANNEL_HPP
#define VSLICE_CHANNEL_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "vslice/common.hpp"
#include "vslice/config.hpp"
#include "vslice/scenario.hpp"

namespace vslice {

/// (lambda * beta) / (2 pi d) * exp(-j 2 pi d / lambda); d and lambda in meters.
Complex los_gain(double d_m, Complex beta, double lambda_m);

/// PL_dB = 100.7 + 23.5 log10(d_km).
double path_loss_db(double d_km);

/// Thermal noise over one RB: 10^((-174 + NF)/10) mW/Hz * bandwidth.
double noise_power_w(double rb_width_hz, double noise_figure_db = 9.0);

/// Entry k = exp(-j pi k sin(theta)), k = 0..n-1.
Eigen::VectorXcd steering_vector(int n, double theta_rad);
Eigen::VectorXcd steering_from_sine(int n, double sine);

/// Shared time variation of the scatterer reflections: a unit-power complex
/// Gauss-Markov process per scatterer whose one-TTI correlation follows the
/// Clarke/Jakes autocorrelation J0(2 pi f_D T) at the configured speed.
class ScattererFading {
public:
    ScattererFading() = default;
    ScattererFading(int num_scatterers, double correlation, std::uint64_t seed);

    static double correlation_for(const ScenarioConfig& config);

    /// Factor multiplying reflection coefficient `scatterer` at `tti`.
    Complex factor(int scatterer, std::int64_t tti) const;
    double correlation() const { return correlation_; }

private:
    void extend_to(std::int64_t tti) const;

    int num_scatterers_ = 0;
    double correlation_ = 1.0;
    std::uint64_t seed_ = 0;
    mutable Rng rng_{0};
    mutable std::vector<std::vector<Complex>> trajectory_;
};

struct PropagationPath {
    Complex gain;       // complex amplitude at the carrier
    double delay_s;     // propagation delay
    double tx_sine;     // spatial frequency at the RSU array
    double rx_sine;     // spatial frequency at the vehicle array
};

/// All rays between an RSU and a vehicle at one TTI. Throws DomainError if
/// the endpoints (or a scatterer and an endpoint) coincide.
std::vector<PropagationPath> trace_paths(const Vec2& rsu, const Vec2& vehicle,
                                         const EnvironmentGeometry& geometry,
                                         const ScattererFading& fading, std::int64_t tti,
                                         double lambda_m);

/// Frequency offset of RB `rb` from the carrier (band-centred).
double rb_offset_hz(int rb, const ScenarioConfig& config);

struct ChannelMatrix {
    Eigen::MatrixXcd entries; // N_r x N_t
    RsuId rsu = 0;
    VehicleId vehicle = 0;
    int rb = 0;
    std::int64_t tti = 0;
};

/// Explicit sum of rank-one ray contributions with the per-RB delay phase.
Eigen::MatrixXcd assemble_channel(const std::vector<PropagationPath>& paths, double freq_offset_hz,
                                  int n_rx, int n_tx);

ChannelMatrix realize_channel(RsuId rsu, const VehicleState& vehicle,
                              const EnvironmentGeometry& geometry, int rb, std::int64_t tti,
                              const ScattererFading& fading, const ScenarioConfig& config);

/// Fast evaluation of MRC beam gains ||H_b w_k||^2 for DFT codebook columns
/// directly from the ray list, without materialising H. Matches
/// assemble_channel + explicit product to rounding error.
class LinkGains {
public:
    LinkGains() = default;
    LinkGains(std::vector<PropagationPath> paths, const ScenarioConfig& config);

    static constexpr std::size_t kMaxPaths = 64;

    double gain(int rb, BeamIndex beam) const;
    /// Memoises gains of `beam` across RBs (the serving beam is queried
    /// repeatedly within a TTI).
    void pin(BeamIndex beam);
    /// Gains for every beam on one RB.
    std::vector<double> profile(int rb) const;

    int num_paths() const { return static_cast<int>(paths_.size()); }

private:
    Complex tx_response(int path, BeamIndex beam) const;
    const Complex* tx_row(BeamIndex beam) const;
    double compute_gain(int rb, BeamIndex beam) const;

    std::vector<PropagationPath> paths_;
    int n_tx_ = 0;
    int n_rx_ = 0;
    std::vector<Eigen::VectorXcd> rx_steer_;   // per path
    std::vector<std::vector<Complex>> rb_amp_; // [path][rb] gain * delay phase
    std::vector<Complex> tx_numerator_;        // per path, (1 - e^{j pi s N}) / sqrt(N)
    std::vector<Complex> tx_phase_;            // per path, e^{j pi s}
    std::shared_ptr<const std::vector<Complex>> roots_;
    std::vector<Complex> gram_;                // [path][path] rx steering inner products
    // Transmit responses, filled per beam on first use.
    mutable std::vector<Complex> tx_cache_;    // [beam][path]
    mutable std::vector<char> tx_ready_;
    BeamIndex pinned_beam_ = -1;
    mutable std::vector<double> pinned_; // -1 until computed
};

} // namespace vslice

#endif
