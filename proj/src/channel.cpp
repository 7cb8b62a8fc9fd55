// SPDX-License-Identifier: Apache-2.0

#include "vslice/channel.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace vslice {

Complex los_gain(double d_m, Complex beta, double lambda_m)
{
    if (!(d_m > 0.0)) throw DomainError("los_gain: distance must be positive");
    if (!(lambda_m > 0.0)) throw DomainError("los_gain: wavelength must be positive");
    const double phase = -2.0 * kPi * d_m / lambda_m;
    return (lambda_m * beta) / (2.0 * kPi * d_m) * std::polar(1.0, phase);
}

double path_loss_db(double d_km) { return PathLossModel{}.loss_db(d_km); }

double noise_power_w(double rb_width_hz, double noise_figure_db)
{
    if (!(rb_width_hz > 0.0)) throw DomainError("noise_power_w: bandwidth must be positive");
    return std::pow(10.0, (-174.0 + noise_figure_db) / 10.0) * 1e-3 * rb_width_hz;
}

Eigen::VectorXcd steering_from_sine(int n, double sine)
{
    if (n < 1) throw ContractViolation("steering vector needs n >= 1");
    Eigen::VectorXcd a(n);
    for (int k = 0; k < n; ++k) a(k) = std::polar(1.0, -kPi * k * sine);
    return a;
}

Eigen::VectorXcd steering_vector(int n, double theta_rad) { return steering_from_sine(n, std::sin(theta_rad)); }

// --- scatterer fading --------------------------------------------------------

ScattererFading::ScattererFading(int num_scatterers, double correlation, std::uint64_t seed)
    : num_scatterers_(num_scatterers), correlation_(std::clamp(correlation, -1.0, 1.0)), seed_(seed),
      rng_(seed, "scatterer-fading"), trajectory_(static_cast<std::size_t>(num_scatterers))
{
}

double ScattererFading::correlation_for(const ScenarioConfig& config)
{
    const double doppler_hz = config.speed_mps() / config.wavelength_m();
    return std::cyl_bessel_j(0.0, 2.0 * kPi * doppler_hz * config.tti_s);
}

void ScattererFading::extend_to(std::int64_t tti) const
{
    const double innovation = std::sqrt(std::max(0.0, 1.0 - correlation_ * correlation_));
    while (!trajectory_.empty() && static_cast<std::int64_t>(trajectory_[0].size()) <= tti) {
        for (auto& traj : trajectory_) {
            const Complex w = rng_.complex_normal();
            traj.push_back(traj.empty() ? w : correlation_ * traj.back() + innovation * w);
        }
    }
}

Complex ScattererFading::factor(int scatterer, std::int64_t tti) const
{
    if (scatterer < 0 || scatterer >= num_scatterers_) throw ContractViolation("scatterer index out of range");
    if (tti < 0) throw ContractViolation("negative TTI");
    extend_to(tti);
    return trajectory_[static_cast<std::size_t>(scatterer)][static_cast<std::size_t>(tti)];
}

// --- rays --------------------------------------------------------------------

std::vector<PropagationPath> trace_paths(const Vec2& rsu, const Vec2& vehicle,
                                         const EnvironmentGeometry& geometry,
                                         const ScattererFading& fading, std::int64_t tti,
                                         double lambda_m)
{
    const double d = distance(rsu, vehicle);
    if (!(d > 0.0)) throw DomainError("trace_paths: RSU and vehicle coincide");

    std::vector<PropagationPath> paths;
    paths.reserve(1 + geometry.scatterer_positions_m.size());
    paths.push_back({los_gain(d, 1.0, lambda_m), d / kSpeedOfLight, (vehicle.x - rsu.x) / d,
                     (rsu.x - vehicle.x) / d});

    for (std::size_t s = 0; s < geometry.scatterer_positions_m.size(); ++s) {
        const Vec2& p = geometry.scatterer_positions_m[s];
        const double d1 = distance(rsu, p);
        const double d2 = distance(p, vehicle);
        if (!(d1 > 0.0) || !(d2 > 0.0)) throw DomainError("trace_paths: scatterer coincides with an endpoint");
        const Complex rho = geometry.reflection_coefficients[s] * fading.factor(static_cast<int>(s), tti);
        paths.push_back({los_gain(d1 + d2, rho, lambda_m), (d1 + d2) / kSpeedOfLight, (p.x - rsu.x) / d1,
                         (p.x - vehicle.x) / d2});
    }
    return paths;
}

double rb_offset_hz(int rb, const ScenarioConfig& config)
{
    return (rb - 0.5 * (config.num_rb - 1)) * config.rb_width_hz();
}

Eigen::MatrixXcd assemble_channel(const std::vector<PropagationPath>& paths, double freq_offset_hz,
                                  int n_rx, int n_tx)
{
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n_rx, n_tx);
    for (const auto& p : paths) {
        const Complex amp = p.gain * std::polar(1.0, -2.0 * kPi * freq_offset_hz * p.delay_s);
        h += amp * steering_from_sine(n_rx, p.rx_sine) * steering_from_sine(n_tx, p.tx_sine).adjoint();
    }
    return h;
}

ChannelMatrix realize_channel(RsuId rsu, const VehicleState& vehicle,
                              const EnvironmentGeometry& geometry, int rb, std::int64_t tti,
                              const ScattererFading& fading, const ScenarioConfig& config)
{
    if (rsu < 0 || rsu >= static_cast<RsuId>(geometry.rsu_positions_m.size()))
        throw ContractViolation("realize_channel: RSU id out of range");
    const auto paths = trace_paths(geometry.rsu_positions_m[static_cast<std::size_t>(rsu)], vehicle.position_m,
                                   geometry, fading, tti, config.wavelength_m());
    return {assemble_channel(paths, rb_offset_hz(rb, config), config.n_rx, config.n_tx), rsu, vehicle.id, rb, tti};
}

// --- fast beam gains ---------------------------------------------------------

namespace {

// exp(-j 2 pi k / n), k = 0..n-1; one table per array size.
std::shared_ptr<const std::vector<Complex>> unit_roots(int n)
{
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const std::vector<Complex>>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[n];
    if (!slot) {
        auto r = std::make_shared<std::vector<Complex>>(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) (*r)[static_cast<std::size_t>(k)] = std::polar(1.0, -2.0 * kPi * k / n);
        slot = std::move(r);
    }
    return slot;
}

} // namespace

LinkGains::LinkGains(std::vector<PropagationPath> paths, const ScenarioConfig& config)
    : paths_(std::move(paths)), n_tx_(config.n_tx), n_rx_(config.n_rx)
{
    if (paths_.size() > kMaxPaths) throw ContractViolation("LinkGains: too many propagation paths");
    roots_ = unit_roots(n_tx_);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n_tx_));
    rx_steer_.reserve(paths_.size());
    rb_amp_.reserve(paths_.size());
    tx_numerator_.reserve(paths_.size());
    for (const auto& p : paths_) {
        rx_steer_.push_back(steering_from_sine(n_rx_, p.rx_sine));
        // Phase recurrence across RBs: offset_b = offset_0 + b * width.
        const Complex step = std::polar(1.0, -2.0 * kPi * config.rb_width_hz() * p.delay_s);
        Complex amp = p.gain * std::polar(1.0, -2.0 * kPi * rb_offset_hz(0, config) * p.delay_s);
        std::vector<Complex> per_rb(static_cast<std::size_t>(config.num_rb));
        for (auto& a : per_rb) {
            a = amp;
            amp *= step;
        }
        rb_amp_.push_back(std::move(per_rb));
        tx_numerator_.push_back((1.0 - std::polar(1.0, kPi * p.tx_sine * n_tx_)) * inv_sqrt_n);
        tx_phase_.push_back(std::polar(1.0, kPi * p.tx_sine));
    }
    // Receive-side Gram matrix: ||sum_p c_p a_p||^2 = c^H G c.
    const std::size_t np = paths_.size();
    gram_.resize(np * np);
    for (std::size_t p = 0; p < np; ++p)
        for (std::size_t q = 0; q < np; ++q) gram_[p * np + q] = rx_steer_[p].dot(rx_steer_[q]);
    tx_cache_.assign(np * static_cast<std::size_t>(n_tx_), Complex{});
    tx_ready_.assign(static_cast<std::size_t>(n_tx_), 0);
}

Complex LinkGains::tx_response(int path, BeamIndex beam) const
{
    // a_t(s)^H w_k = N^{-1/2} sum_m z^m with z = exp(j (pi s - 2 pi k / N)).
    const auto p = static_cast<std::size_t>(path);
    const Complex z = tx_phase_[p] * (*roots_)[static_cast<std::size_t>(beam)];
    const Complex denom = 1.0 - z;
    if (std::abs(denom) < 1e-6) {
        Complex acc = 0.0, zm = 1.0;
        for (int m = 0; m < n_tx_; ++m, zm *= z) acc += zm;
        return acc / std::sqrt(static_cast<double>(n_tx_));
    }
    return tx_numerator_[p] / denom;
}

const Complex* LinkGains::tx_row(BeamIndex beam) const
{
    if (beam < 0 || beam >= n_tx_) throw ContractViolation("LinkGains: beam index out of range");
    const auto np = paths_.size();
    Complex* row = tx_cache_.data() + static_cast<std::size_t>(beam) * np;
    if (!tx_ready_[static_cast<std::size_t>(beam)]) {
        for (std::size_t p = 0; p < np; ++p) row[p] = tx_response(static_cast<int>(p), beam);
        tx_ready_[static_cast<std::size_t>(beam)] = 1;
    }
    return row;
}

double LinkGains::compute_gain(int rb, BeamIndex beam) const
{
    const Complex* tx = tx_row(beam);
    const auto np = paths_.size();
    const auto b = static_cast<std::size_t>(rb);
    Complex c[kMaxPaths];
    for (std::size_t p = 0; p < np; ++p) c[p] = rb_amp_[p][b] * tx[p];
    double acc = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
        const Complex* g = gram_.data() + p * np;
        acc += std::norm(c[p]) * g[p].real();
        Complex cross = 0.0;
        for (std::size_t q = p + 1; q < np; ++q) cross += g[q] * c[q];
        acc += 2.0 * (std::conj(c[p]) * cross).real();
    }
    return std::max(acc, 0.0);
}

double LinkGains::gain(int rb, BeamIndex beam) const
{
    if (beam != pinned_beam_) return compute_gain(rb, beam);
    double& g = pinned_[static_cast<std::size_t>(rb)];
    if (g < 0.0) g = compute_gain(rb, beam);
    return g;
}

void LinkGains::pin(BeamIndex beam)
{
    pinned_beam_ = beam;
    pinned_.assign(rb_amp_.empty() ? 0 : rb_amp_.front().size(), -1.0);
}

std::vector<double> LinkGains::profile(int rb) const
{
    std::vector<double> out(static_cast<std::size_t>(n_tx_));
    for (int k = 0; k < n_tx_; ++k) out[static_cast<std::size_t>(k)] = gain(rb, k);
    return out;
}

} // namespace vslice
