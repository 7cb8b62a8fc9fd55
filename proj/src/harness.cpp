// SPDX-License-Identifier: Apache-2.0

#include "vslice/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace vslice {

// --- plan --------------------------------------------------------------------

namespace {

template <class T>
std::vector<T> read_list(const nlohmann::json& j, const char* key)
{
    if (!j.is_array()) throw ConfigError(std::string("plan: '") + key + "' must be a list");
    std::vector<T> out;
    try {
        for (const auto& v : j) out.push_back(v.get<T>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("plan: bad entry in '") + key + "': " + e.what());
    }
    return out;
}

template <class T>
void read_value(const nlohmann::json& j, const char* key, T& out)
{
    try {
        out = j.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("plan: bad value for '") + key + "': " + e.what());
    }
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const char* where)
{
    if (!j.is_object()) throw ConfigError(std::string("plan: '") + where + "' must be an object");
    for (const auto& [k, v] : j.items()) {
        (void)v;
        if (std::find_if(known.begin(), known.end(), [&](const char* s) { return k == s; }) == known.end())
            throw ConfigError(std::string("plan: unknown key '") + k + "' in " + where);
    }
}

} // namespace

ExperimentPlan plan_from_json(const nlohmann::json& j)
{
    reject_unknown(j, {"base", "sweep", "seeds", "num_ttis", "training", "analysis", "per_tti", "output_dir"}, "plan");
    ExperimentPlan plan;
    if (j.contains("base")) plan.base = scenario_from_json(j.at("base"));

    plan.epsilons = {plan.base.epsilon};
    plan.distances_m = {plan.base.inter_vehicle_distance_m};
    plan.modes = {plan.base.mode};
    plan.horizons = {plan.base.horizon};
    plan.seeds = {plan.base.seed};

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        reject_unknown(s, {"epsilon", "inter_vehicle_distance_m", "mode", "horizon"}, "sweep");
        if (s.contains("epsilon")) plan.epsilons = read_list<double>(s.at("epsilon"), "epsilon");
        if (s.contains("inter_vehicle_distance_m"))
            plan.distances_m = read_list<double>(s.at("inter_vehicle_distance_m"), "inter_vehicle_distance_m");
        if (s.contains("mode")) {
            plan.modes.clear();
            for (const auto& m : read_list<std::string>(s.at("mode"), "mode")) plan.modes.push_back(parse_mode(m));
        }
        if (s.contains("horizon")) plan.horizons = read_list<int>(s.at("horizon"), "horizon");
    }
    if (j.contains("seeds")) plan.seeds = read_list<std::uint64_t>(j.at("seeds"), "seeds");
    if (j.contains("num_ttis")) read_value(j.at("num_ttis"), "num_ttis", plan.num_ttis);
    if (j.contains("training")) {
        const auto& t = j.at("training");
        reject_unknown(t, {"trace_ttis", "epochs", "batch_size", "learning_rate"}, "training");
        if (t.contains("trace_ttis")) read_value(t.at("trace_ttis"), "trace_ttis", plan.training.trace_ttis);
        if (t.contains("epochs")) read_value(t.at("epochs"), "epochs", plan.training.epochs);
        if (t.contains("batch_size")) read_value(t.at("batch_size"), "batch_size", plan.training.batch_size);
        if (t.contains("learning_rate")) read_value(t.at("learning_rate"), "learning_rate", plan.training.learning_rate);
    }
    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        reject_unknown(a, {"angular_bins", "trace_ttis"}, "analysis");
        if (a.contains("angular_bins")) plan.analysis.angular_bins = read_list<int>(a.at("angular_bins"), "angular_bins");
        if (a.contains("trace_ttis")) read_value(a.at("trace_ttis"), "trace_ttis", plan.analysis.trace_ttis);
    }
    if (j.contains("per_tti")) read_value(j.at("per_tti"), "per_tti", plan.per_tti);
    if (j.contains("output_dir")) {
        std::string dir;
        read_value(j.at("output_dir"), "output_dir", dir);
        plan.output_dir = dir;
    }
    validate(plan);
    return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path)
{
    return plan_from_json(read_json_file(path));
}

nlohmann::json to_json(const ExperimentPlan& plan)
{
    nlohmann::json base;
    to_json(base, plan.base);
    nlohmann::json modes = nlohmann::json::array();
    for (auto m : plan.modes) modes.push_back(to_string(m));
    return {
        {"base", base},
        {"sweep",
         {{"epsilon", plan.epsilons},
          {"inter_vehicle_distance_m", plan.distances_m},
          {"mode", modes},
          {"horizon", plan.horizons}}},
        {"seeds", plan.seeds},
        {"num_ttis", plan.num_ttis},
        {"training",
         {{"trace_ttis", plan.training.trace_ttis},
          {"epochs", plan.training.epochs},
          {"batch_size", plan.training.batch_size},
          {"learning_rate", plan.training.learning_rate}}},
        {"analysis", {{"angular_bins", plan.analysis.angular_bins}, {"trace_ttis", plan.analysis.trace_ttis}}},
        {"per_tti", plan.per_tti},
        {"output_dir", plan.output_dir.string()},
    };
}

void validate(const ExperimentPlan& plan)
{
    plan.base.validate();
    if (plan.epsilons.empty() || plan.distances_m.empty() || plan.modes.empty() || plan.horizons.empty())
        throw ConfigError("plan: sweep lists must be non-empty");
    if (plan.seeds.empty()) throw ConfigError("plan: at least one seed is required");
    if (std::set<std::uint64_t>(plan.seeds.begin(), plan.seeds.end()).size() != plan.seeds.size())
        throw ConfigError("plan: seeds must be distinct");
    for (double e : plan.epsilons)
        if (!(e > 0.0 && e < 1.0)) throw ConfigError("plan: epsilon must be in (0, 1)");
    for (double d : plan.distances_m)
        if (!(d > 0.0)) throw ConfigError("plan: inter_vehicle_distance_m must be positive");
    for (int h : plan.horizons)
        if (h < 1) throw ConfigError("plan: horizon must be >= 1");
    if (plan.num_ttis < 1) throw ConfigError("plan: num_ttis must be >= 1");
    if (plan.training.trace_ttis < 2 || plan.training.epochs < 0 || plan.training.batch_size < 1 ||
        !(plan.training.learning_rate > 0.0))
        throw ConfigError("plan: invalid training section");
    for (int h : plan.horizons)
        if (h >= plan.training.trace_ttis) throw ConfigError("plan: horizon must be shorter than the training trace");
    for (int r : plan.analysis.angular_bins)
        if (r < 2 || plan.base.n_tx % r != 0) throw ConfigError("plan: angular_bins must divide n_tx and be >= 2");
    if (plan.analysis.trace_ttis < 1) throw ConfigError("plan: analysis.trace_ttis must be >= 1");
}

ScenarioConfig grid_config(const ExperimentPlan& plan, double epsilon, double distance_m, CsiMode mode, int horizon,
                           std::uint64_t seed)
{
    ScenarioConfig c = plan.base;
    c.epsilon = epsilon;
    c.mode = mode;
    c.horizon = horizon;
    c.seed = seed;
    if (distance_m != plan.base.inter_vehicle_distance_m) {
        const double road = plan.base.road_length_m();
        const int n = std::max(2, static_cast<int>(std::lround(road / distance_m)));
        c.num_embb = n / 2;
        c.num_urllc = n - n / 2;
        c.inter_vehicle_distance_m = road / n;
    }
    c.validate();
    return c;
}

double density_per_km(const ScenarioConfig& config)
{
    return 1000.0 / config.inter_vehicle_distance_m;
}

std::vector<GridPoint> expand_grid(const ExperimentPlan& plan)
{
    std::vector<GridPoint> out;
    int id = 0;
    for (CsiMode mode : plan.modes) {
        const std::vector<int> horizons = mode == CsiMode::perfect ? std::vector<int>{plan.base.horizon} : plan.horizons;
        for (int h : horizons)
            for (double d : plan.distances_m)
                for (double e : plan.epsilons) out.push_back({id++, mode, e, d, h});
    }
    return out;
}

// --- models ------------------------------------------------------------------

MlpModel train_model(const ScenarioConfig& config, const TrainingPlan& training, Trace* trace_out,
                     std::vector<double>* history_out)
{
    Trace trace = generate_trace(config, training.trace_ttis, "training");
    const Dataset ds = build_dataset(trace, config.horizon);
    Rng rng(config.seed, "training");
    MlpModel model = MlpModel::glorot(MlpModel::default_widths(config.n_tx), rng);
    TrainOptions opts;
    opts.epochs = training.epochs;
    opts.batch_size = training.batch_size;
    opts.adam.learning_rate = training.learning_rate;
    const auto result = train(model, ds.train, opts, rng);
    if (history_out) *history_out = result.epoch_loss;
    if (trace_out) *trace_out = std::move(trace);
    return model;
}

ModelCache::Entry& ModelCache::entry(const ScenarioConfig& config)
{
    const Key key{config.seed, config.inter_vehicle_distance_m, config.horizon};
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
    Entry e;
    Trace trace;
    e.model = train_model(config, training_, &trace, &e.history);
    const MlpModel& m = e.model;
    e.evaluation = evaluate_predictions(trace, config.horizon, [&](const TrainingSample& s) { return m.predict(s.input); });
    return entries_.emplace(key, std::move(e)).first->second;
}

void ModelCache::put(const ScenarioConfig& config, MlpModel model)
{
    if (model.input_size() != config.n_tx || model.output_size() != config.n_tx)
        throw ConfigError("model shape does not match n_tx");
    const Trace trace = generate_trace(config, training_.trace_ttis, "training");
    Entry e;
    e.model = std::move(model);
    const MlpModel& m = e.model;
    e.evaluation = evaluate_predictions(trace, config.horizon, [&](const TrainingSample& s) { return m.predict(s.input); });
    entries_[Key{config.seed, config.inter_vehicle_distance_m, config.horizon}] = std::move(e);
}

const MlpModel& ModelCache::get(const ScenarioConfig& config) { return entry(config).model; }
const HorizonEvaluation& ModelCache::evaluation(const ScenarioConfig& config) { return entry(config).evaluation; }
const std::vector<double>& ModelCache::history(const ScenarioConfig& config) { return entry(config).history; }

// --- simulation --------------------------------------------------------------

MetricsRow simulate_point(const GridPoint& point, const ScenarioConfig& config, std::int64_t num_ttis,
                          const MlpModel* model, std::vector<PerTtiRow>* per_tti)
{
    Simulation sim(config);
    std::optional<MlpInferrer> inferrer;
    if (config.mode == CsiMode::inferred) {
        if (model == nullptr) throw ConfigError("simulate_point: inferred mode needs a model");
        inferrer.emplace(*model);
        sim.set_inferrer(&*inferrer);
    }
    for (std::int64_t t = 0; t < num_ttis; ++t) {
        const TtiRecord rec = sim.step();
        if (per_tti == nullptr) continue;
        for (const auto& v : rec.vehicles) {
            const auto i = static_cast<std::size_t>(v.id);
            per_tti->push_back({point.grid_id, config.seed, rec.tti, v.id, v.slice,
                                static_cast<int>(rec.grid.rbs_of(v.serving_rsu, v.id).size()), rec.rate_bps[i],
                                sim.tracker().running_mean(v.id)});
        }
    }

    MetricsRow row;
    row.point = point;
    row.seed = config.seed;
    row.density = density_per_km(config);
    row.summary = aggregate(sim.tracker(), sim.ledger(), sim.vehicles(), config);
    const double seconds = static_cast<double>(num_ttis) * config.tti_s;
    double eg = 0.0, ug = 0.0;
    int ne = 0, nu = 0;
    for (const auto& v : sim.vehicles()) {
        const double g = sim.delivered_bits()[static_cast<std::size_t>(v.id)] / seconds;
        if (v.slice == Slice::embb) {
            eg += g;
            ++ne;
        } else {
            ug += g;
            ++nu;
        }
    }
    row.embb_goodput_bps = ne > 0 ? eg / ne : 0.0;
    row.urllc_goodput_bps = nu > 0 ? ug / nu : 0.0;
    return row;
}

// --- MI / CCA ----------------------------------------------------------------

std::vector<MiCcaRow> analyze_mi_cca(const ExperimentPlan& plan)
{
    std::vector<Trace> traces;
    for (auto seed : plan.seeds) {
        const auto c = grid_config(plan, plan.base.epsilon, plan.base.inter_vehicle_distance_m, CsiMode::perfect,
                                   plan.base.horizon, seed);
        traces.push_back(generate_trace(c, plan.analysis.trace_ttis, "analysis"));
    }
    std::vector<MiCcaRow> out;
    for (int r : plan.analysis.angular_bins) {
        std::vector<double> xs, ys;
        std::vector<std::vector<double>> xrows, yrows;
        for (const auto& tr : traces) {
            for (std::int64_t t = 0; t < tr.num_ttis; ++t) {
                for (std::size_t e = 0; e < tr.embb_ids.size(); ++e) {
                    const auto rep = tr.reporter_features(t, e);
                    const auto own = tr.embb_feature(t, e);
                    xs.push_back(dominant_group(rep, r));
                    ys.push_back(dominant_group(own, r));
                    xrows.push_back(grouped_profile(rep, r));
                    yrows.push_back(grouped_profile(own, r));
                }
            }
        }
        MiCcaRow row;
        row.angular_bins = r;
        if (xs.size() >= 2) row.mi_nats = estimate_mi(xs, ys, r);
        if (xrows.size() > static_cast<std::size_t>(r)) {
            Eigen::MatrixXd x(static_cast<Eigen::Index>(xrows.size()), r), y(static_cast<Eigen::Index>(yrows.size()), r);
            for (std::size_t i = 0; i < xrows.size(); ++i)
                for (int k = 0; k < r; ++k) {
                    x(static_cast<Eigen::Index>(i), k) = xrows[i][static_cast<std::size_t>(k)];
                    y(static_cast<Eigen::Index>(i), k) = yrows[i][static_cast<std::size_t>(k)];
                }
            row.canonical_corr = canonical_corr(x, y).correlation;
        }
        out.push_back(row);
    }
    return out;
}

// --- run ---------------------------------------------------------------------

RunResults run_plan(const ExperimentPlan& plan, const RunSelection& what)
{
    ModelCache cache(plan.training);
    return run_plan(plan, what, cache);
}

RunResults run_plan(const ExperimentPlan& plan, const RunSelection& what, ModelCache& cache)
{
    validate(plan);
    const auto start = std::chrono::steady_clock::now();
    RunResults res;

    if (what.simulate) {
        for (const auto& p : expand_grid(plan)) {
            for (auto seed : plan.seeds) {
                const auto c = grid_config(plan, p.epsilon, p.distance_m, p.mode, p.horizon, seed);
                const MlpModel* model = p.mode == CsiMode::inferred ? &cache.get(c) : nullptr;
                res.metrics.push_back(simulate_point(p, c, plan.num_ttis, model, plan.per_tti ? &res.per_tti : nullptr));
            }
        }
    }
    if (what.evaluate) {
        for (int h : plan.horizons) {
            auto& pooled = res.losses[h];
            for (auto seed : plan.seeds) {
                const auto c = grid_config(plan, plan.base.epsilon, plan.base.inter_vehicle_distance_m,
                                           CsiMode::inferred, h, seed);
                const auto& ev = cache.evaluation(c);
                pooled.insert(pooled.end(), ev.losses.begin(), ev.losses.end());
            }
        }
    }
    if (what.analyze) res.mi_cca = analyze_mi_cca(plan);
    res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

// --- output ------------------------------------------------------------------

namespace {

std::string num(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string opt_num(const std::optional<double>& x)
{
    return x ? num(*x) : std::string();
}

std::string utc_timestamp()
{
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

std::string metrics_csv(const std::vector<MetricsRow>& rows)
{
    std::ostringstream o;
    o << "grid_id,seed,mode,epsilon,density,mean_embb_rate_bps,std_embb_rate_bps,embb_satisfaction,"
         "urllc_violation,overhead_reports,overhead_reduction\n";
    for (const auto& r : rows) {
        o << r.point.grid_id << ',' << r.seed << ',' << to_string(r.point.mode) << ',' << num(r.point.epsilon) << ','
          << num(r.density) << ',' << num(r.summary.mean_embb_rate_bps) << ',' << num(r.summary.std_embb_rate_bps)
          << ',' << opt_num(r.summary.embb_satisfaction) << ',' << opt_num(r.summary.urllc_violation) << ','
          << r.summary.overhead_reports << ',' << num(r.summary.overhead_reduction) << '\n';
    }
    return o.str();
}

std::string goodput_csv(const std::vector<MetricsRow>& rows)
{
    std::ostringstream o;
    o << "grid_id,seed,mean_embb_goodput_bps,mean_urllc_goodput_bps\n";
    for (const auto& r : rows)
        o << r.point.grid_id << ',' << r.seed << ',' << num(r.embb_goodput_bps) << ',' << num(r.urllc_goodput_bps)
          << '\n';
    return o.str();
}

std::string loss_ccdf_csv(const std::map<int, std::vector<double>>& losses)
{
    std::ostringstream o;
    o << "horizon,loss_value,ccdf_prob\n";
    for (const auto& [h, samples] : losses) {
        if (samples.empty()) continue;
        for (const auto& [v, p] : ccdf(samples).points()) o << h << ',' << num(v) << ',' << num(p) << '\n';
    }
    return o.str();
}

std::string mi_cca_csv(const std::vector<MiCcaRow>& rows)
{
    std::ostringstream o;
    o << "angular_bins,mi_nats,canonical_corr\n";
    for (const auto& r : rows) o << r.angular_bins << ',' << num(r.mi_nats) << ',' << num(r.canonical_corr) << '\n';
    return o.str();
}

std::string per_tti_csv(const std::vector<PerTtiRow>& rows)
{
    std::ostringstream o;
    o << "grid_id,seed,tti,vehicle,slice,rbs_assigned,rate_bps,running_avg_bps\n";
    for (const auto& r : rows)
        o << r.grid_id << ',' << r.seed << ',' << r.tti << ',' << r.vehicle << ',' << to_string(r.slice) << ','
          << r.rbs_assigned << ',' << num(r.rate_bps) << ',' << num(r.running_avg_bps) << '\n';
    return o.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& body)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DomainError("cannot open " + tmp.string() + " for writing");
        out << body;
        out.flush();
        if (!out) throw DomainError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_outputs(const RunResults& results, const ExperimentPlan& plan, const RunSelection& what)
{
    std::filesystem::create_directories(plan.output_dir);
    const auto& dir = plan.output_dir;
    if (what.simulate) {
        write_file_atomic(dir / "metrics.csv", metrics_csv(results.metrics));
        write_file_atomic(dir / "goodput.csv", goodput_csv(results.metrics));
        if (plan.per_tti) write_file_atomic(dir / "per_tti.csv", per_tti_csv(results.per_tti));
    }
    if (what.evaluate) write_file_atomic(dir / "loss_ccdf.csv", loss_ccdf_csv(results.losses));
    if (what.analyze) write_file_atomic(dir / "mi_cca.csv", mi_cca_csv(results.mi_cca));

    nlohmann::json grid = nlohmann::json::array();
    for (const auto& p : expand_grid(plan))
        grid.push_back({{"grid_id", p.grid_id},
                        {"mode", to_string(p.mode)},
                        {"epsilon", p.epsilon},
                        {"inter_vehicle_distance_m", p.distance_m},
                        {"horizon", p.horizon}});
    nlohmann::json meta = {
        {"software", "vslice"},
        {"version", kVersion},
        {"plan", to_json(plan)},
        {"seeds", plan.seeds},
        {"grid", grid},
        {"wall_time_s", results.wall_time_s},
        {"finished_at", utc_timestamp()},
    };
    write_file_atomic(dir / "run_meta.json", meta.dump(2) + "\n");
}

std::string checkpoint_name(std::uint64_t seed, double distance_m, int horizon)
{
    return "model_s" + std::to_string(seed) + "_d" + num(distance_m) + "_h" + std::to_string(horizon) + ".ckpt";
}

int run(const ExperimentPlan& plan, const RunSelection& what)
{
    ModelCache cache(plan.training);
    return run(plan, what, cache);
}

int run(const ExperimentPlan& plan, const RunSelection& what, ModelCache& cache)
{
    try {
        const auto results = run_plan(plan, what, cache);
        write_outputs(results, plan, what);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "vslice: " << e.what() << '\n';
        return 1;
    }
}

} // namespace vslice
