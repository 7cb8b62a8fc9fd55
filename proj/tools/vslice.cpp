// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: simulate, train, evaluate, analyze, all.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "vslice/harness.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> mode;
    std::optional<double> epsilon;
    std::optional<int> horizon;
    bool per_tti = false;
    std::string models;
};

void add_common(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config, "Experiment plan (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Run a single seed");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--mode", o.mode, "perfect | inferred")->check(CLI::IsMember({"perfect", "inferred"}));
    cmd->add_option("--epsilon", o.epsilon, "URLLC reliability target");
    cmd->add_option("--horizon", o.horizon, "Prediction horizon in TTIs");
}

vslice::ExperimentPlan make_plan(const Overrides& o)
{
    vslice::ExperimentPlan plan = o.config.empty() ? vslice::plan_from_json(nlohmann::json::object())
                                                   : vslice::load_plan(o.config);
    if (o.seed) plan.seeds = {*o.seed};
    if (o.out) plan.output_dir = *o.out;
    if (o.mode) plan.modes = {vslice::parse_mode(*o.mode)};
    if (o.epsilon) plan.epsilons = {*o.epsilon};
    if (o.horizon) plan.horizons = {*o.horizon};
    if (o.per_tti) plan.per_tti = true;
    vslice::validate(plan);
    return plan;
}

// Loads checkpoints named by checkpoint_name() from `dir` when present.
void preload_models(const vslice::ExperimentPlan& plan, const std::filesystem::path& dir, vslice::ModelCache& cache)
{
    for (auto seed : plan.seeds)
        for (double d : plan.distances_m)
            for (int h : plan.horizons) {
                const auto c = vslice::grid_config(plan, plan.base.epsilon, d, vslice::CsiMode::inferred, h, seed);
                const auto path = dir / vslice::checkpoint_name(seed, c.inter_vehicle_distance_m, h);
                if (std::filesystem::exists(path)) cache.put(c, vslice::load_checkpoint(path));
            }
}

int cmd_train(const vslice::ExperimentPlan& plan)
{
    std::filesystem::create_directories(plan.output_dir);
    std::ostringstream log;
    log << "seed,inter_vehicle_distance_m,horizon,epoch,loss\n";
    for (auto seed : plan.seeds)
        for (double d : plan.distances_m)
            for (int h : plan.horizons) {
                const auto c = vslice::grid_config(plan, plan.base.epsilon, d, vslice::CsiMode::inferred, h, seed);
                std::vector<double> history;
                const auto model = vslice::train_model(c, plan.training, nullptr, &history);
                vslice::save_checkpoint(model,
                                        plan.output_dir / vslice::checkpoint_name(seed, c.inter_vehicle_distance_m, h));
                for (std::size_t e = 0; e < history.size(); ++e)
                    log << seed << ',' << c.inter_vehicle_distance_m << ',' << h << ',' << e << ',' << history[e] << '\n';
            }
    vslice::write_file_atomic(plan.output_dir / "training_loss.csv", log.str());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sliced vehicular downlink simulator"};
    app.require_subcommand(1);
    Overrides o;

    auto* simulate = app.add_subcommand("simulate", "Run the scheduler grid and write metrics.csv");
    add_common(simulate, o);
    simulate->add_flag("--per-tti", o.per_tti, "Also write per_tti.csv");
    simulate->add_option("--models", o.models, "Directory with checkpoints to use in inferred mode");

    auto* train = app.add_subcommand("train", "Train one beam-inference model per seed, density and horizon");
    add_common(train, o);

    auto* evaluate = app.add_subcommand("evaluate", "Beamforming-loss CCDF per horizon (loss_ccdf.csv)");
    add_common(evaluate, o);
    evaluate->add_option("--models", o.models, "Directory with checkpoints (trained on demand when missing)");

    auto* analyze = app.add_subcommand("analyze", "Mutual information and canonical correlation (mi_cca.csv)");
    add_common(analyze, o);

    auto* all = app.add_subcommand("all", "simulate + evaluate + analyze");
    add_common(all, o);
    all->add_flag("--per-tti", o.per_tti, "Also write per_tti.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto plan = make_plan(o);
        vslice::ModelCache cache(plan.training);
        if (!o.models.empty()) preload_models(plan, o.models, cache);

        if (train->parsed()) return cmd_train(plan);
        vslice::RunSelection what{false, false, false};
        if (simulate->parsed()) what.simulate = true;
        if (evaluate->parsed()) what.evaluate = true;
        if (analyze->parsed()) what.analyze = true;
        if (all->parsed()) what = {true, true, true};
        return vslice::run(plan, what, cache);
    } catch (const std::exception& e) {
        std::cerr << "vslice: " << e.what() << '\n';
        return 1;
    }
}
