// Python module: codebook and beam helpers, link-level functions, statistics,
// and plan execution. Configs and plans are passed as dicts.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vslice/channel.hpp"
#include "vslice/harness.hpp"
#include "vslice/l2s.hpp"

namespace py = pybind11;
using namespace vslice;

namespace {

nlohmann::json to_cpp(const py::object& obj)
{
    const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
    return nlohmann::json::parse(text);
}

py::object to_py(const nlohmann::json& j)
{
    return py::module_::import("json").attr("loads")(j.dump());
}

py::object optional_value(const std::optional<double>& v)
{
    return v ? py::object(py::float_(*v)) : py::object(py::none());
}

py::dict summary_dict(const MetricsSummary& s)
{
    py::dict d;
    d["mean_embb_rate_bps"] = s.mean_embb_rate_bps;
    d["std_embb_rate_bps"] = s.std_embb_rate_bps;
    d["embb_satisfaction"] = optional_value(s.embb_satisfaction);
    d["urllc_violation"] = optional_value(s.urllc_violation);
    d["overhead_reports"] = s.overhead_reports;
    d["overhead_full_reports"] = s.overhead_full_reports;
    d["overhead_reduction"] = s.overhead_reduction;
    return d;
}

py::dict metrics_dict(const MetricsRow& r)
{
    py::dict d = summary_dict(r.summary);
    d["grid_id"] = r.point.grid_id;
    d["seed"] = r.seed;
    d["mode"] = std::string(to_string(r.point.mode));
    d["epsilon"] = r.point.epsilon;
    d["inter_vehicle_distance_m"] = r.point.distance_m;
    d["horizon"] = r.point.horizon;
    d["density"] = r.density;
    d["mean_embb_goodput_bps"] = r.embb_goodput_bps;
    d["mean_urllc_goodput_bps"] = r.urllc_goodput_bps;
    return d;
}

RunSelection selection(bool simulate, bool evaluate, bool analyze)
{
    return {simulate, evaluate, analyze};
}

} // namespace

PYBIND11_MODULE(_vslice, m)
{
    m.doc() = "Sliced vehicular downlink simulator";
    m.attr("__version__") = kVersion;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);

    m.def("dft_codebook", [](int n) { return Eigen::MatrixXcd(dft_codebook(n).columns); }, py::arg("n"),
          "Unitary n x n DFT codebook; column k is beam k.");
    m.def(
        "beam_gain", [](const Eigen::MatrixXcd& h, const Eigen::VectorXcd& w) { return beam_gain(h, w); },
        py::arg("h"), py::arg("w"));
    m.def(
        "optimal_beam",
        [](const Eigen::MatrixXcd& h) { return optimal_beam(h, dft_codebook(static_cast<int>(h.cols()))); },
        py::arg("h"), "Index of the DFT beam with the largest gain for channel h (n_rx x n_tx).");
    m.def(
        "beamforming_loss",
        [](BeamIndex predicted, const std::vector<double>& gains) { return beamforming_loss(predicted, gains); },
        py::arg("predicted"), py::arg("gains"));

    m.def("los_gain", &los_gain, py::arg("d_m"), py::arg("beta") = Complex(1.0, 0.0), py::arg("lambda_m"));
    m.def("path_loss_db", &path_loss_db, py::arg("d_km"));
    m.def("noise_power_w", &noise_power_w, py::arg("rb_width_hz"), py::arg("noise_figure_db") = 9.0);

    m.def("mi_per_rb", [](double sinr) { return mi_per_rb(sinr, MiCurve{}); }, py::arg("sinr"));
    m.def("effective_mi", [](const std::vector<double>& mi) { return effective_mi(mi); }, py::arg("per_rb_mi"));
    m.def("bler", [](double mi) { return bler(mi, MiCurve{}); }, py::arg("effective_mi"));

    m.def(
        "estimate_mi",
        [](const std::vector<double>& x, const std::vector<double>& y, int bins) { return estimate_mi(x, y, bins); },
        py::arg("x"), py::arg("y"), py::arg("bins"), "Histogram mutual information in nats.");
    m.def(
        "canonical_corr",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) { return canonical_corr(x, y).correlation; },
        py::arg("x"), py::arg("y"), "First canonical correlation; rows are samples.");

    m.def(
        "default_config", [] { return to_py(nlohmann::json(ScenarioConfig{})); },
        "Scenario defaults as a dict.");
    m.def(
        "simulate",
        [](const py::object& config, std::int64_t num_ttis) {
            const auto c = scenario_from_json(to_cpp(config));
            if (c.mode != CsiMode::perfect) throw ConfigError("simulate: inferred mode needs a trained model; use run_plan");
            GridPoint p;
            p.epsilon = c.epsilon;
            p.distance_m = c.inter_vehicle_distance_m;
            MetricsRow row;
            {
                py::gil_scoped_release release;
                row = simulate_point(p, c, num_ttis, nullptr, nullptr);
            }
            return metrics_dict(row);
        },
        py::arg("config"), py::arg("num_ttis"), "Perfect-CSI run of one scenario; returns the metrics summary.");

    m.def(
        "run_plan",
        [](const py::object& plan_obj, bool simulate, bool evaluate, bool analyze) {
            const auto plan = plan_from_json(to_cpp(plan_obj));
            RunResults res;
            {
                py::gil_scoped_release release;
                res = run_plan(plan, selection(simulate, evaluate, analyze));
            }
            py::list metrics;
            for (const auto& r : res.metrics) metrics.append(metrics_dict(r));
            py::dict losses;
            for (const auto& [h, v] : res.losses) losses[py::int_(h)] = v;
            py::list mi;
            for (const auto& r : res.mi_cca) {
                py::dict d;
                d["angular_bins"] = r.angular_bins;
                d["mi_nats"] = r.mi_nats;
                d["canonical_corr"] = r.canonical_corr;
                mi.append(d);
            }
            py::dict out;
            out["metrics"] = metrics;
            out["losses"] = losses;
            out["mi_cca"] = mi;
            return out;
        },
        py::arg("plan"), py::arg("simulate") = true, py::arg("evaluate") = true, py::arg("analyze") = true,
        "Runs an experiment plan in memory.");

    m.def(
        "run",
        [](const py::object& plan_obj) {
            const auto plan = plan_from_json(to_cpp(plan_obj));
            py::gil_scoped_release release;
            return run(plan);
        },
        py::arg("plan"), "Runs a plan and writes its CSV outputs; returns 0 on success.");
}
