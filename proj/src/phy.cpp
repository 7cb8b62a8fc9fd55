// SPDX-License-Identifier: Apache-2.0

#include "vslice/phy.hpp"

#include <algorithm>

namespace vslice {

Codebook dft_codebook(int n)
{
    if (n < 1) throw ContractViolation("dft_codebook: n must be >= 1");
    Codebook cb{Eigen::MatrixXcd(n, n)};
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m) {
            // Reduce m*k modulo n first so the phase stays exact for large n.
            const auto mk = static_cast<long long>(m) * k % n;
            cb.columns(m, k) = std::polar(scale, -2.0 * kPi * static_cast<double>(mk) / n);
        }
    return cb;
}

double beam_gain(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& w)
{
    if (h.cols() != w.size()) throw ContractViolation("beam_gain: channel/beam dimension mismatch");
    return (h * w).squaredNorm();
}

BeamIndex argmax_beam(std::span<const double> gains)
{
    BeamIndex best = 0;
    for (std::size_t k = 1; k < gains.size(); ++k)
        if (gains[k] > gains[static_cast<std::size_t>(best)]) best = static_cast<BeamIndex>(k);
    return best;
}

std::vector<double> beam_profile(const Eigen::MatrixXcd& h, const Codebook& cb)
{
    if (h.cols() != cb.columns.rows()) throw ContractViolation("beam_profile: channel/codebook mismatch");
    const Eigen::MatrixXcd hw = h * cb.columns;
    std::vector<double> g(static_cast<std::size_t>(cb.size()));
    for (int k = 0; k < cb.size(); ++k) g[static_cast<std::size_t>(k)] = hw.col(k).squaredNorm();
    return g;
}

BeamIndex optimal_beam(const Eigen::MatrixXcd& h, const Codebook& cb)
{
    const auto g = beam_profile(h, cb);
    return argmax_beam(g);
}

SinrReport sinr_per_rb(VehicleId vehicle, RsuId serving, BeamIndex beam, const ResourceGrid& grid,
                       std::span<const BeamIndex> beam_of, const ChannelSource& channels,
                       const LinkConstants& link)
{
    SinrReport out;
    out.sinr.resize(static_cast<std::size_t>(grid.num_rb()));
    out.interference_w.resize(static_cast<std::size_t>(grid.num_rb()));
    for (int b = 0; b < grid.num_rb(); ++b) {
        double interference = 0.0;
        for (RsuId s = 0; s < grid.num_rsu(); ++s) {
            if (s == serving) continue;
            const VehicleId other = grid.holder(s, b);
            if (other == kNoVehicle) continue;
            interference += link.power_per_rb_w *
                            channels.beam_gain(s, vehicle, b, beam_of[static_cast<std::size_t>(other)]);
        }
        const double signal = link.power_per_rb_w * channels.beam_gain(serving, vehicle, b, beam);
        out.interference_w[static_cast<std::size_t>(b)] = interference;
        out.sinr[static_cast<std::size_t>(b)] = signal / (link.noise_w + interference);
    }
    return out;
}

double achievable_rate(VehicleId vehicle, RsuId serving, const ResourceGrid& grid, const SinrReport& sinr,
                       double rb_width_hz)
{
    double rate = 0.0;
    for (int b = 0; b < grid.num_rb(); ++b)
        if (grid.omega(serving, b, vehicle)) rate += rb_width_hz * std::log2(1.0 + sinr.sinr[static_cast<std::size_t>(b)]);
    return rate;
}

AngularCsi quantize_profile(std::span<const double> gains, int num_levels, double range_db)
{
    AngularCsi csi;
    csi.num_levels = num_levels;
    csi.levels.assign(gains.size(), 0);
    const double peak = gains.empty() ? 0.0 : *std::max_element(gains.begin(), gains.end());
    if (!(peak > 0.0)) return csi;
    const int top = num_levels - 1;
    for (std::size_t k = 0; k < gains.size(); ++k) {
        if (!(gains[k] > 0.0)) continue;
        const double rel_db = 10.0 * std::log10(gains[k] / peak);
        const double q = std::floor((rel_db + range_db) / range_db * top + 0.5);
        csi.levels[k] = static_cast<std::uint8_t>(std::clamp(q, 0.0, static_cast<double>(top)));
    }
    return csi;
}

AngularCsi angular_transform(const Eigen::MatrixXcd& h, const Codebook& cb, int num_levels, double range_db)
{
    const auto g = beam_profile(h, cb);
    return quantize_profile(g, num_levels, range_db);
}

} // namespace vslice
