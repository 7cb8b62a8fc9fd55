// SPDX-License-Identifier: Apache-2.0

#include "vslice/infer.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace vslice {

// --- dataset -----------------------------------------------------------------

std::vector<double> scale_features(std::span<const std::uint8_t> levels, int num_levels)
{
    if (num_levels < 2) throw ContractViolation("scale_features: need at least two levels");
    const double inv = 1.0 / static_cast<double>(num_levels - 1);
    std::vector<double> out(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) out[i] = levels[i] * inv;
    return out;
}

Dataset build_dataset(const Trace& trace, int horizon)
{
    if (horizon < 1) throw ContractViolation("build_dataset: horizon must be >= 1");
    if (horizon >= trace.num_ttis && !(horizon == 1 && trace.num_ttis == 1))
        throw ContractViolation("build_dataset: horizon must be shorter than the trace");

    std::vector<TrainingSample> all;
    const std::int64_t last = trace.num_ttis - horizon; // inclusive
    all.reserve(static_cast<std::size_t>(last + 1) * trace.embb_ids.size());
    for (std::int64_t t = 0; t <= last; ++t) {
        for (std::size_t e = 0; e < trace.embb_ids.size(); ++e) {
            TrainingSample s;
            s.input = scale_features(trace.reporter_features(t, e), trace.num_levels);
            s.label = trace.label(t + horizon - 1, e);
            s.horizon = horizon;
            s.tti = t;
            s.embb_index = e;
            all.push_back(std::move(s));
        }
    }
    // Split on TTI boundaries so no TTI straddles train and test.
    const std::int64_t split_tti = (last + 1) * 4 / 5;
    Dataset ds;
    for (auto& s : all) (s.tti < split_tti ? ds.train : ds.test).push_back(std::move(s));
    return ds;
}

// --- model -------------------------------------------------------------------

MlpModel::MlpModel(std::vector<int> widths) : widths_(std::move(widths))
{
    if (widths_.size() < 2) throw ContractViolation("MlpModel: need at least input and output widths");
    for (int w : widths_)
        if (w < 1) throw ContractViolation("MlpModel: widths must be positive");
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        offsets_.push_back(offset);
        offset += static_cast<std::size_t>(widths_[l + 1]) * static_cast<std::size_t>(widths_[l] + 1);
    }
    params_.assign(offset, 0.0);
}

MlpModel MlpModel::glorot(std::vector<int> widths, Rng& rng)
{
    MlpModel m(std::move(widths));
    for (int l = 0; l < m.num_layers(); ++l) {
        const int in = m.widths_[static_cast<std::size_t>(l)];
        const int out = m.widths_[static_cast<std::size_t>(l) + 1];
        const double a = std::sqrt(6.0 / static_cast<double>(in + out));
        auto w = m.weight(l);
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) w(r, c) = rng.uniform(-a, a);
    }
    return m;
}

std::size_t MlpModel::bias_offset(int layer) const
{
    const auto l = static_cast<std::size_t>(layer);
    return offsets_[l] + static_cast<std::size_t>(widths_[l + 1]) * static_cast<std::size_t>(widths_[l]);
}

Eigen::Map<RowMajorMatrix> MlpModel::weight(int layer)
{
    const auto l = static_cast<std::size_t>(layer);
    return {params_.data() + weight_offset(layer), widths_[l + 1], widths_[l]};
}

Eigen::Map<const RowMajorMatrix> MlpModel::weight(int layer) const
{
    const auto l = static_cast<std::size_t>(layer);
    return {params_.data() + weight_offset(layer), widths_[l + 1], widths_[l]};
}

Eigen::Map<Eigen::VectorXd> MlpModel::bias(int layer)
{
    return {params_.data() + bias_offset(layer), widths_[static_cast<std::size_t>(layer) + 1]};
}

Eigen::Map<const Eigen::VectorXd> MlpModel::bias(int layer) const
{
    return {params_.data() + bias_offset(layer), widths_[static_cast<std::size_t>(layer) + 1]};
}

namespace {

void softmax_columns(Eigen::MatrixXd& z)
{
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        auto col = z.col(c);
        col.array() -= col.maxCoeff();
        col = col.array().exp().matrix();
        col /= col.sum();
    }
}

} // namespace

Eigen::MatrixXd MlpModel::forward_batch(const Eigen::MatrixXd& inputs) const
{
    if (inputs.rows() != input_size()) throw ContractViolation("MlpModel: input length mismatch");
    Eigen::MatrixXd a = inputs;
    for (int l = 0; l < num_layers(); ++l) {
        Eigen::MatrixXd z = weight(l) * a;
        z.colwise() += bias(l);
        if (l + 1 < num_layers()) z = z.cwiseMax(0.0);
        a = std::move(z);
    }
    softmax_columns(a);
    return a;
}

Eigen::VectorXd MlpModel::forward(std::span<const double> input) const
{
    if (static_cast<int>(input.size()) != input_size()) throw ContractViolation("MlpModel: input length mismatch");
    const Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
    return forward_batch(x);
}

BeamIndex MlpModel::predict(std::span<const double> input) const
{
    const Eigen::VectorXd p = forward(input);
    return argmax_beam(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
}

double MlpModel::loss_and_gradient(const Eigen::MatrixXd& inputs, std::span<const int> labels,
                                   std::vector<double>& gradient) const
{
    const auto batch = inputs.cols();
    if (inputs.rows() != input_size()) throw ContractViolation("MlpModel: input length mismatch");
    if (static_cast<Eigen::Index>(labels.size()) != batch || batch == 0)
        throw ContractViolation("MlpModel: label count mismatch");

    const int layers = num_layers();
    std::vector<Eigen::MatrixXd> act(static_cast<std::size_t>(layers) + 1); // act[0] = input
    act[0] = inputs;
    for (int l = 0; l < layers; ++l) {
        Eigen::MatrixXd z = weight(l) * act[static_cast<std::size_t>(l)];
        z.colwise() += bias(l);
        if (l + 1 < layers) z = z.cwiseMax(0.0);
        act[static_cast<std::size_t>(l) + 1] = std::move(z);
    }
    Eigen::MatrixXd& probs = act.back();
    softmax_columns(probs);

    double loss = 0.0;
    Eigen::MatrixXd delta = probs;
    for (Eigen::Index c = 0; c < batch; ++c) {
        const int y = labels[static_cast<std::size_t>(c)];
        if (y < 0 || y >= output_size()) throw ContractViolation("MlpModel: label out of range");
        loss -= std::log(std::max(probs(y, c), 1e-300));
        delta(y, c) -= 1.0;
    }
    const double inv_b = 1.0 / static_cast<double>(batch);
    loss *= inv_b;
    delta *= inv_b;

    gradient.assign(params_.size(), 0.0);
    for (int l = layers - 1; l >= 0; --l) {
        const auto& prev = act[static_cast<std::size_t>(l)];
        const auto lu = static_cast<std::size_t>(l);
        Eigen::Map<RowMajorMatrix> gw(gradient.data() + weight_offset(l), widths_[lu + 1], widths_[lu]);
        Eigen::Map<Eigen::VectorXd> gb(gradient.data() + bias_offset(l), widths_[lu + 1]);
        gw.noalias() = delta * prev.transpose();
        gb = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = weight(l).transpose() * delta;
            // ReLU derivative; zero at the kink.
            delta = (prev.array() > 0.0).select(back, 0.0);
        }
    }
    return loss;
}

double MlpModel::loss(const Eigen::MatrixXd& inputs, std::span<const int> labels) const
{
    const Eigen::MatrixXd p = forward_batch(inputs);
    if (static_cast<Eigen::Index>(labels.size()) != p.cols()) throw ContractViolation("MlpModel: label count mismatch");
    double total = 0.0;
    for (Eigen::Index c = 0; c < p.cols(); ++c) total -= std::log(std::max(p(labels[static_cast<std::size_t>(c)], c), 1e-300));
    return total / static_cast<double>(p.cols());
}

// --- Adam --------------------------------------------------------------------

AdamState::AdamState(std::size_t num_parameters, AdamConfig config)
    : config_(config), m_(num_parameters, 0.0), v_(num_parameters, 0.0)
{
}

void AdamState::step(std::span<double> params, std::span<const double> gradient)
{
    if (params.size() != m_.size() || gradient.size() != m_.size()) throw ContractViolation("AdamState: size mismatch");
    ++steps_;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = b1 * m_[i] + (1.0 - b1) * gradient[i];
        v_[i] = b2 * v_[i] + (1.0 - b2) * gradient[i] * gradient[i];
        const double mh = m_[i] / c1;
        const double vh = v_[i] / c2;
        params[i] -= config_.learning_rate * mh / (std::sqrt(vh) + config_.eps);
    }
}

// --- training ----------------------------------------------------------------

TrainResult train(MlpModel& model, std::span<const TrainingSample> samples, const TrainOptions& options, Rng& rng)
{
    if (samples.empty()) throw ContractViolation("train: empty dataset");
    if (options.batch_size < 1 || options.epochs < 0) throw ContractViolation("train: invalid options");
    const auto n_in = model.input_size();
    for (const auto& s : samples)
        if (static_cast<int>(s.input.size()) != n_in) throw ContractViolation("train: sample length mismatch");

    AdamState adam(model.parameters().size(), options.adam);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> grad;
    Eigen::MatrixXd x;
    std::vector<int> y;

    TrainResult result;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        // Fisher-Yates with the library RNG so shuffles match across platforms.
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        double sum = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(options.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(options.batch_size));
            x.resize(n_in, static_cast<Eigen::Index>(end - start));
            y.resize(end - start);
            for (std::size_t k = start; k < end; ++k) {
                const auto& s = samples[order[k]];
                x.col(static_cast<Eigen::Index>(k - start)) =
                    Eigen::Map<const Eigen::VectorXd>(s.input.data(), n_in);
                y[k - start] = s.label;
            }
            sum += model.loss_and_gradient(x, y, grad);
            adam.step(model.parameters(), grad);
            ++batches;
        }
        result.epoch_loss.push_back(sum / batches);
    }
    result.steps = adam.steps();
    return result;
}

// --- evaluation --------------------------------------------------------------

namespace {

template <class T>
double loss_from_profile(BeamIndex predicted, std::span<const T> gains)
{
    if (predicted < 0 || static_cast<std::size_t>(predicted) >= gains.size())
        throw ContractViolation("beamforming_loss: beam index out of range");
    const double best = static_cast<double>(*std::max_element(gains.begin(), gains.end()));
    if (!(best > 0.0)) return 0.0;
    const double ratio = static_cast<double>(gains[static_cast<std::size_t>(predicted)]) / best;
    return std::clamp(1.0 - ratio, 0.0, 1.0);
}

} // namespace

double beamforming_loss(BeamIndex predicted, std::span<const double> gains)
{
    return loss_from_profile(predicted, gains);
}

double beamforming_loss(BeamIndex predicted, std::span<const float> gains)
{
    return loss_from_profile(predicted, gains);
}

double beamforming_loss(BeamIndex predicted, const Eigen::MatrixXcd& channel, const Codebook& codebook)
{
    const auto g = beam_profile(channel, codebook);
    return loss_from_profile(predicted, std::span<const double>(g));
}

HorizonEvaluation evaluate_predictions(const Trace& trace, int horizon, const BeamPredictor& predict)
{
    const Dataset ds = build_dataset(trace, horizon);
    HorizonEvaluation ev;
    ev.horizon = horizon;
    std::size_t exact = 0, hits = 0;
    for (const auto& s : ds.test) {
        const BeamIndex b = predict(s);
        const double l = beamforming_loss(b, trace.gains(s.tti + horizon - 1, s.embb_index));
        ev.losses.push_back(l);
        exact += l == 0.0 ? 1 : 0;
        hits += b == s.label ? 1 : 0;
    }
    if (!ev.losses.empty()) {
        ev.exact_fraction = static_cast<double>(exact) / static_cast<double>(ev.losses.size());
        ev.accuracy = static_cast<double>(hits) / static_cast<double>(ev.losses.size());
    }
    return ev;
}

std::map<int, HorizonEvaluation> evaluate_horizons(const std::map<int, MlpModel>& models, const Trace& trace)
{
    std::map<int, HorizonEvaluation> out;
    for (const auto& [h, model] : models)
        out[h] = evaluate_predictions(trace, h, [&](const TrainingSample& s) { return model.predict(s.input); });
    return out;
}

// --- checkpoints -------------------------------------------------------------

namespace {

constexpr std::array<char, 8> kMagic{'V', 'S', 'M', 'L', 'P', 'C', 'K', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v)
{
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    out.write(b, 4);
}

void put_f64(std::ostream& out, double x)
{
    const auto v = std::bit_cast<std::uint64_t>(x);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    out.write(b, 8);
}

std::uint32_t get_u32(std::istream& in)
{
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw DomainError("checkpoint: truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in)
{
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw DomainError("checkpoint: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

} // namespace

void write_checkpoint(const MlpModel& model, std::ostream& out)
{
    out.write(kMagic.data(), kMagic.size());
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(model.num_layers()));
    for (int l = 0; l < model.num_layers(); ++l) {
        put_u32(out, static_cast<std::uint32_t>(model.widths()[static_cast<std::size_t>(l) + 1]));
        put_u32(out, static_cast<std::uint32_t>(model.widths()[static_cast<std::size_t>(l)]));
    }
    for (double p : model.parameters()) put_f64(out, p);
    if (!out) throw DomainError("checkpoint: write failed");
}

MlpModel read_checkpoint(std::istream& in)
{
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw DomainError("checkpoint: bad magic");
    if (get_u32(in) != kVersion) throw DomainError("checkpoint: unsupported version");
    const auto layers = get_u32(in);
    if (layers == 0 || layers > 64) throw DomainError("checkpoint: implausible layer count");
    std::vector<int> widths;
    for (std::uint32_t l = 0; l < layers; ++l) {
        const auto rows = get_u32(in);
        const auto cols = get_u32(in);
        if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20)) throw DomainError("checkpoint: bad shape");
        if (l == 0) widths.push_back(static_cast<int>(cols));
        else if (static_cast<int>(cols) != widths.back()) throw DomainError("checkpoint: inconsistent layer shapes");
        widths.push_back(static_cast<int>(rows));
    }
    MlpModel model(std::move(widths));
    for (double& p : model.parameters()) {
        p = get_f64(in);
        if (!std::isfinite(p)) throw DomainError("checkpoint: non-finite parameter");
    }
    return model;
}

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DomainError("checkpoint: cannot open " + tmp.string());
        write_checkpoint(model, out);
        out.flush();
        if (!out) throw DomainError("checkpoint: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

MlpModel load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("checkpoint: cannot open " + path.string());
    return read_checkpoint(in);
}

// --- scheduler adapter -------------------------------------------------------

BeamIndex MlpInferrer::infer(const InferenceRequest& request) const
{
    if (request.reporter_csi == nullptr) throw ContractViolation("MlpInferrer: missing reporter CSI");
    const auto& csi = *request.reporter_csi;
    return model_.predict(scale_features(csi.levels, csi.num_levels));
}

} // namespace vslice
