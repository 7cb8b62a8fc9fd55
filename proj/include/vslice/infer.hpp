// SPDX-License-Identifier: Apache-2.0
//
// Beam inference: a small fully connected network that maps a URLLC vehicle's
// quantized angular CSI to a distribution over the paired eMBB vehicle's
// codebook beams. Trained with cross-entropy + Adam, evaluated with the
// beamforming loss 1 - g(predicted) / g(optimal).

#ifndef VSLICE_INFER_HPP
#define VSLICE_INFER_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vslice/common.hpp"
#include "vslice/phy.hpp"
#include "vslice/simulator.hpp"

namespace vslice {

struct TrainingSample {
    std::vector<double> input; // features scaled to [0, 1]
    BeamIndex label = 0;
    int horizon = 1;
    std::int64_t tti = 0;       // TTI of the input
    std::size_t embb_index = 0; // index into Trace::embb_ids
};

struct Dataset {
    std::vector<TrainingSample> train;
    std::vector<TrainingSample> test;
};

/// One sample per (eMBB vehicle, t) with t + horizon - 1 inside the trace;
/// the first 80% (chronological) go to training.
Dataset build_dataset(const Trace& trace, int horizon);

/// Features scaled by 1/(levels-1).
std::vector<double> scale_features(std::span<const std::uint8_t> levels, int num_levels);

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Fully connected network, ReLU hidden layers, softmax output. Parameters
/// live in one flat vector: per layer, the row-major weight matrix
/// (out x in) followed by the bias.
class MlpModel {
public:
    MlpModel() = default;
    /// All parameters zero.
    explicit MlpModel(std::vector<int> widths);
    /// Glorot-uniform weights, zero biases.
    static MlpModel glorot(std::vector<int> widths, Rng& rng);
    /// [n, 128, 128, n].
    static std::vector<int> default_widths(int n_beams) { return {n_beams, 128, 128, n_beams}; }

    const std::vector<int>& widths() const { return widths_; }
    int num_layers() const { return static_cast<int>(widths_.size()) - 1; }
    int input_size() const { return widths_.front(); }
    int output_size() const { return widths_.back(); }

    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }

    Eigen::Map<RowMajorMatrix> weight(int layer);
    Eigen::Map<const RowMajorMatrix> weight(int layer) const;
    Eigen::Map<Eigen::VectorXd> bias(int layer);
    Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

    /// Output distribution for one input. Throws ContractViolation on a
    /// length mismatch.
    Eigen::VectorXd forward(std::span<const double> input) const;
    /// Column-per-sample batch version.
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;

    /// Mean cross-entropy over the batch; writes d(loss)/d(parameters) into
    /// `gradient` (resized to the parameter count).
    double loss_and_gradient(const Eigen::MatrixXd& inputs, std::span<const int> labels,
                             std::vector<double>& gradient) const;
    double loss(const Eigen::MatrixXd& inputs, std::span<const int> labels) const;

    BeamIndex predict(std::span<const double> input) const;

    friend bool operator==(const MlpModel&, const MlpModel&) = default;

private:
    std::size_t weight_offset(int layer) const { return offsets_[static_cast<std::size_t>(layer)]; }
    std::size_t bias_offset(int layer) const;

    std::vector<int> widths_;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
};

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class AdamState {
public:
    AdamState() = default;
    AdamState(std::size_t num_parameters, AdamConfig config);

    /// One bias-corrected update in place.
    void step(std::span<double> params, std::span<const double> gradient);

    std::int64_t steps() const { return steps_; }
    const AdamConfig& config() const { return config_; }
    const std::vector<double>& first_moment() const { return m_; }
    const std::vector<double>& second_moment() const { return v_; }

private:
    AdamConfig config_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::int64_t steps_ = 0;
};

struct TrainOptions {
    int epochs = 10;
    int batch_size = 64;
    AdamConfig adam;
};

struct TrainResult {
    std::vector<double> epoch_loss; // mean minibatch loss per epoch
    std::int64_t steps = 0;
};

/// Minibatch Adam on cross-entropy. Sample order is reshuffled every epoch
/// from `rng`. Throws ContractViolation on an empty dataset.
TrainResult train(MlpModel& model, std::span<const TrainingSample> samples, const TrainOptions& options, Rng& rng);

/// 1 - gains[predicted] / max(gains); 0 for an all-zero profile.
double beamforming_loss(BeamIndex predicted, std::span<const double> gains);
double beamforming_loss(BeamIndex predicted, std::span<const float> gains);
double beamforming_loss(BeamIndex predicted, const Eigen::MatrixXcd& channel, const Codebook& codebook);

struct HorizonEvaluation {
    int horizon = 1;
    std::vector<double> losses;
    double exact_fraction = 0.0; // share of samples with loss exactly 0
    double accuracy = 0.0;       // share with predicted == label
};

using BeamPredictor = std::function<BeamIndex(const TrainingSample&)>;

/// Scores `predict` on the test split of `trace` at `horizon`.
HorizonEvaluation evaluate_predictions(const Trace& trace, int horizon, const BeamPredictor& predict);

/// Per-horizon evaluation of one trained model per horizon.
std::map<int, HorizonEvaluation> evaluate_horizons(const std::map<int, MlpModel>& models, const Trace& trace);

/// Checkpoint I/O; the byte layout is described in docs/checkpoint_format.md.
void write_checkpoint(const MlpModel& model, std::ostream& out);
MlpModel read_checkpoint(std::istream& in);
void save_checkpoint(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_checkpoint(const std::filesystem::path& path);

/// Scheduler-side adapter: argmax of the network on the reporter's CSI.
class MlpInferrer : public BeamInferrer {
public:
    explicit MlpInferrer(const MlpModel& model) : model_(model) {}
    BeamIndex infer(const InferenceRequest& request) const override;

private:
    const MlpModel& model_;
};

} // namespace vslice

#endif
