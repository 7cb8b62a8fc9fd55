// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: plan parsing, the epsilon x density x mode x
// horizon grid, model training/caching, and CSV/JSON outputs.

#ifndef VSLICE_HARNESS_HPP
#define VSLICE_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "vslice/analysis.hpp"
#include "vslice/config.hpp"
#include "vslice/infer.hpp"

namespace vslice {

inline constexpr const char* kVersion = "0.1.0";

struct TrainingPlan {
    std::int64_t trace_ttis = 50000;
    int epochs = 10;
    int batch_size = 64;
    double learning_rate = 1e-4;
};

struct AnalysisPlan {
    std::vector<int> angular_bins{4, 8, 16, 32, 64};
    std::int64_t trace_ttis = 2000;
};

struct ExperimentPlan {
    ScenarioConfig base;
    std::vector<double> epsilons;
    std::vector<double> distances_m; // inter-vehicle distance sweep (density)
    std::vector<CsiMode> modes;
    std::vector<int> horizons;
    std::vector<std::uint64_t> seeds;
    std::int64_t num_ttis = 10000;
    TrainingPlan training;
    AnalysisPlan analysis;
    bool per_tti = false;
    std::filesystem::path output_dir = "out";
};

/// Missing sweep lists default to the base config's single value. Empty
/// lists, duplicate seeds and unknown keys raise ConfigError.
ExperimentPlan plan_from_json(const nlohmann::json& j);
ExperimentPlan load_plan(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentPlan& plan);
void validate(const ExperimentPlan& plan);

/// Scenario for one grid point. The road length of the base scenario is
/// held fixed, so a smaller spacing means more vehicles:
/// N = max(2, round(L / d)), split into N/2 eMBB and N - N/2 URLLC vehicles.
ScenarioConfig grid_config(const ExperimentPlan& plan, double epsilon, double distance_m, CsiMode mode, int horizon,
                           std::uint64_t seed);

/// Vehicles per km.
double density_per_km(const ScenarioConfig& config);

struct GridPoint {
    int grid_id = 0;
    CsiMode mode = CsiMode::perfect;
    double epsilon = 0.0;
    double distance_m = 0.0;
    int horizon = 1;
};

/// Cartesian grid in mode, horizon, distance, epsilon order; perfect mode
/// ignores the horizon list.
std::vector<GridPoint> expand_grid(const ExperimentPlan& plan);

struct MetricsRow {
    GridPoint point;
    std::uint64_t seed = 0;
    double density = 0.0;
    MetricsSummary summary;
    double embb_goodput_bps = 0.0;  // mean over eMBB vehicles
    double urllc_goodput_bps = 0.0; // mean over URLLC vehicles
};

struct PerTtiRow {
    int grid_id = 0;
    std::uint64_t seed = 0;
    std::int64_t tti = 0;
    VehicleId vehicle = 0;
    Slice slice = Slice::urllc;
    int rbs_assigned = 0;
    double rate_bps = 0.0;
    double running_avg_bps = 0.0;
};

struct MiCcaRow {
    int angular_bins = 0;
    double mi_nats = 0.0;
    double canonical_corr = 0.0;
};

/// Trains (once) and hands out one model per (seed, distance, horizon).
class ModelCache {
public:
    explicit ModelCache(TrainingPlan training) : training_(training) {}

    const MlpModel& get(const ScenarioConfig& config);
    /// Test-split beamforming losses of the model for `config`.
    const HorizonEvaluation& evaluation(const ScenarioConfig& config);
    /// Per-epoch training loss of the model for `config`.
    const std::vector<double>& history(const ScenarioConfig& config);

    /// Installs an already trained model (for example from a checkpoint);
    /// its evaluation is computed on a regenerated training trace.
    void put(const ScenarioConfig& config, MlpModel model);

    std::size_t size() const { return entries_.size(); }

private:
    struct Entry {
        MlpModel model;
        std::vector<double> history;
        HorizonEvaluation evaluation;
    };
    using Key = std::tuple<std::uint64_t, double, int>;
    Entry& entry(const ScenarioConfig& config);

    TrainingPlan training_;
    std::map<Key, Entry> entries_;
};

/// Trains a model on a fresh training trace of `config` (horizon taken from
/// config). Initialisation and shuffling draw from the seed's "training"
/// stream independently of the horizon, so horizons are matched.
MlpModel train_model(const ScenarioConfig& config, const TrainingPlan& training, Trace* trace_out = nullptr,
                     std::vector<double>* history_out = nullptr);

/// Simulates one grid point for `num_ttis`. `model` is required in inferred
/// mode. Per-TTI rows are appended when `per_tti` is non-null.
MetricsRow simulate_point(const GridPoint& point, const ScenarioConfig& config, std::int64_t num_ttis,
                          const MlpModel* model, std::vector<PerTtiRow>* per_tti);

/// MI and first canonical correlation between reporter and eMBB angular
/// features of the base scenario at each angular resolution, pooled over seeds.
std::vector<MiCcaRow> analyze_mi_cca(const ExperimentPlan& plan);

struct RunResults {
    std::vector<MetricsRow> metrics;
    std::map<int, std::vector<double>> losses; // by horizon, pooled over seeds
    std::vector<MiCcaRow> mi_cca;
    std::vector<PerTtiRow> per_tti;
    double wall_time_s = 0.0;
};

struct RunSelection {
    bool simulate = true;
    bool evaluate = true;
    bool analyze = true;
};

RunResults run_plan(const ExperimentPlan& plan, const RunSelection& what = {});
RunResults run_plan(const ExperimentPlan& plan, const RunSelection& what, ModelCache& cache);

/// Writes metrics.csv, goodput.csv, loss_ccdf.csv, mi_cca.csv, per_tti.csv
/// (when present) and run_meta.json into plan.output_dir. Every file is
/// written to a temporary name and renamed into place.
void write_outputs(const RunResults& results, const ExperimentPlan& plan, const RunSelection& what = {});

/// CSV bodies, exposed for tests.
std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::string goodput_csv(const std::vector<MetricsRow>& rows);
std::string loss_ccdf_csv(const std::map<int, std::vector<double>>& losses);
std::string mi_cca_csv(const std::vector<MiCcaRow>& rows);
std::string per_tti_csv(const std::vector<PerTtiRow>& rows);

/// Atomic text write: `path`.tmp then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& body);

/// Runs the plan and writes outputs; returns 0 on success, 1 with a
/// diagnostic on standard error otherwise.
int run(const ExperimentPlan& plan, const RunSelection& what = {});
int run(const ExperimentPlan& plan, const RunSelection& what, ModelCache& cache);

/// Checkpoint file name used by the command-line tool.
std::string checkpoint_name(std::uint64_t seed, double distance_m, int horizon);

} // namespace vslice

#endif
