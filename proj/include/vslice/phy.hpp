// SPDX-License-Identifier: Apache-2.0
//
// DFT codebook, MRC beam gain, per-RB SINR with inter-RSU interference,
// achievable rate and the quantised angular-domain CSI features.

#ifndef VSLICE_PHY_HPP
#define VSLICE_PHY_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vslice/common.hpp"
#include "vslice/grid.hpp"

namespace vslice {

struct Codebook {
    Eigen::MatrixXcd columns; // N_t x N_t, unitary

    int size() const { return static_cast<int>(columns.cols()); }
    Eigen::VectorXcd column(BeamIndex k) const { return columns.col(k); }
};

/// Column k, entry m = exp(-j 2 pi m k / n) / sqrt(n).
Codebook dft_codebook(int n);

/// ||H w||^2, the gain after maximal ratio combining at the receiver.
double beam_gain(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& w);

/// argmax_k ||H w_k||^2, lowest index on ties.
BeamIndex optimal_beam(const Eigen::MatrixXcd& h, const Codebook& cb);
BeamIndex argmax_beam(std::span<const double> gains);

std::vector<double> beam_profile(const Eigen::MatrixXcd& h, const Codebook& cb);

/// Anything that can report ||H_{rsu,vehicle,rb} w_beam||^2.
class ChannelSource {
public:
    virtual ~ChannelSource() = default;
    virtual double beam_gain(RsuId rsu, VehicleId vehicle, int rb, BeamIndex beam) const = 0;
};

struct LinkConstants {
    double power_per_rb_w = 0.0;
    double noise_w = 0.0;
    double rb_width_hz = 0.0;
};

struct SinrReport {
    std::vector<double> sinr;           // linear, per RB
    std::vector<double> interference_w; // per RB
};

/// SINR_b = P g_b / (sigma^2 + sum over other RSUs using RB b of P g'_b), where
/// the interfering gain uses the beam of the vehicle holding that RB.
/// `beam_of` is indexed by vehicle id.
SinrReport sinr_per_rb(VehicleId vehicle, RsuId serving, BeamIndex beam, const ResourceGrid& grid,
                       std::span<const BeamIndex> beam_of, const ChannelSource& channels,
                       const LinkConstants& link);

/// R = sum_b Omega_b * omega * log2(1 + SINR_b).
double achievable_rate(VehicleId vehicle, RsuId serving, const ResourceGrid& grid, const SinrReport& sinr,
                       double rb_width_hz);

/// Quantised per-beam gain profile. Level Q-1 marks the strongest beam; a beam
/// `range_db` or more below the peak maps to 0.
struct AngularCsi {
    std::vector<std::uint8_t> levels;
    int num_levels = 16;

    bool operator==(const AngularCsi&) const = default;
};

AngularCsi quantize_profile(std::span<const double> gains, int num_levels = 16, double range_db = 40.0);
AngularCsi angular_transform(const Eigen::MatrixXcd& h, const Codebook& cb, int num_levels = 16,
                             double range_db = 40.0);

} // namespace vslice

#endif
