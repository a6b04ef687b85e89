#include "sparsepr/harness.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace sparsepr;

namespace {

py::dict trajectory_columns(std::vector<TrajectoryRecord> const &traj)
{
  auto column = [&](auto member) {
    Eigen::VectorXd v(static_cast<Index>(traj.size()));
    for (std::size_t i = 0; i < traj.size(); ++i) {
      v[static_cast<Index>(i)] = static_cast<double>(traj[i].*member);
    }
    return v;
  };
  py::dict d;
  d["step"] = column(&TrajectoryRecord::step_index);
  d["algo_time"] = column(&TrajectoryRecord::algo_time);
  d["risk"] = column(&TrajectoryRecord::risk);
  d["rel_dist"] = column(&TrajectoryRecord::rel_dist);
  d["rel_bregman"] = column(&TrajectoryRecord::rel_bregman);
  d["off_support_l1"] = column(&TrajectoryRecord::off_support_l1);
  d["min_support_ratio"] = column(&TrajectoryRecord::min_support_ratio);
  d["norm_sq"] = column(&TrajectoryRecord::norm_sq);
  d["inner_ratio"] = column(&TrajectoryRecord::inner_ratio);
  return d;
}

ExperimentSpec spec_from(py::dict const &settings)
{
  ExperimentSpec spec;
  for (auto const &[key, value] : settings) {
    apply_setting(spec, py::str(key).cast<std::string>(), py::str(value).cast<std::string>());
  }
  return spec;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Sparse phase retrieval with hypentropy mirror descent";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DegenerateInstanceError>(m, "DegenerateInstanceError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<SparseSignal>(m, "SparseSignal")
    .def(py::init<Vector>(), py::arg("values"))
    .def_property_readonly("values", &SparseSignal::values)
    .def_property_readonly("support", &SparseSignal::support)
    .def_property_readonly("n", &SparseSignal::n)
    .def_property_readonly("k", &SparseSignal::k)
    .def_property_readonly("norm", &SparseSignal::norm);

  py::enum_<Storage>(m, "Storage").value("dense", Storage::dense).value("regenerate", Storage::regenerate);

  py::class_<MeasurementSet>(m, "MeasurementSet")
    .def_static("from_data", &MeasurementSet::from_data, py::arg("sensing"), py::arg("observations"))
    .def_property_readonly("n", &MeasurementSet::n)
    .def_property_readonly("m", &MeasurementSet::m)
    .def_property_readonly("observations", &MeasurementSet::observations)
    .def_property_readonly("sensing", &MeasurementSet::sensing);

  m.def(
    "generate_signal",
    [](Index n, Index k, std::uint64_t seed, std::optional<double> min_component, double scale) {
      SignalOptions opts;
      opts.min_component = min_component;
      opts.scale = scale;
      return generate_signal(n, k, seed, opts);
    },
    py::arg("n"), py::arg("k"), py::arg("seed"), py::arg("min_component") = py::none(), py::arg("scale") = 1.0);
  m.def("generate_measurements", &generate_measurements, py::arg("signal"), py::arg("m"), py::arg("seed"),
        py::arg("storage") = Storage::dense);
  m.def(
    "empirical_risk", [](Vector const &x, MeasurementSet const &meas) { return empirical_risk(x, meas); },
    py::arg("x"), py::arg("meas"));
  m.def(
    "empirical_gradient", [](Vector const &x, MeasurementSet const &meas) { return empirical_gradient(x, meas); },
    py::arg("x"), py::arg("meas"));
  m.def("population_gradient", &population_gradient, py::arg("x"), py::arg("signal"));
  m.def("estimate_signal_size", &estimate_signal_size, py::arg("meas"));
  m.def("estimate_support_coordinate", &estimate_support_coordinate, py::arg("meas"));

  py::class_<HypentropyMap>(m, "HypentropyMap")
    .def(py::init<double>(), py::arg("beta"))
    .def_property_readonly("beta", &HypentropyMap::beta)
    .def("potential", &HypentropyMap::potential)
    .def("mirror_gradient", &HypentropyMap::mirror_gradient)
    .def("inverse_hessian_diag", &HypentropyMap::inverse_hessian_diag);
  m.def(
    "bregman",
    [](HypentropyMap const &map, Vector const &target, Vector const &x) { return bregman(map, target, x).value; },
    py::arg("map"), py::arg("target"), py::arg("x"));
  m.def("dist", &dist, py::arg("x"), py::arg("target"));
  m.def("dist_bregman", &dist_bregman, py::arg("map"), py::arg("x"), py::arg("target"));

  py::enum_<Algorithm>(m, "Algorithm")
    .value("md_rk4", Algorithm::md_rk4)
    .value("eg_pm", Algorithm::eg_pm)
    .value("hwf", Algorithm::hwf);
  py::enum_<StepScale>(m, "StepScale").value("raw", StepScale::raw).value("signal_cubed", StepScale::signal_cubed);

  py::class_<SolverConfig>(m, "SolverConfig")
    .def(py::init<>())
    .def_readwrite("beta", &SolverConfig::beta)
    .def_readwrite("eta", &SolverConfig::eta)
    .def_readwrite("max_steps", &SolverConfig::max_steps)
    .def_readwrite("algorithm", &SolverConfig::algorithm)
    .def_readwrite("step_scale", &SolverConfig::step_scale)
    .def_readwrite("stop_tol", &SolverConfig::stop_tol)
    .def_readwrite("record_every", &SolverConfig::record_every);

  py::class_<StageReport>(m, "StageReport")
    .def_readonly("t1_step", &StageReport::t1_step)
    .def_readonly("t2_step", &StageReport::t2_step)
    .def_readonly("linear_rate", &StageReport::linear_rate)
    .def_readonly("final_rel_dist", &StageReport::final_rel_dist)
    .def_readonly("max_off_support_l1", &StageReport::max_off_support_l1)
    .def_readonly("warmup_drop_count", &StageReport::warmup_drop_count);

  m.def(
    "run",
    [](MeasurementSet const &meas, SparseSignal const &signal, SolverConfig const &config, Index i0, double delta) {
      RecordedRun rr = run_recorded(meas, signal, config, i0);
      py::dict out;
      out["x"] = rr.result.final_state.x;
      out["steps"] = rr.result.final_state.step_index;
      out["failure"] = rr.result.failure ? py::cast(rr.result.failure->reason) : py::none();
      out["trajectory"] = trajectory_columns(rr.trajectory);
      out["stages"] = detect_stages(rr.trajectory, delta);
      out["audit_passed"] = audit_theorem_invariants(rr.trajectory, signal, meas.m(), delta).all_passed();
      return out;
    },
    py::arg("meas"), py::arg("signal"), py::arg("config"), py::arg("i0"), py::arg("delta") = 0.01,
    "Runs the solver from coordinate i0 and returns the final iterate, trajectory columns and stage report.");

  m.def(
    "run_beta_sweep",
    [](py::dict const &settings) {
      auto const summary = run_beta_sweep(spec_from(settings));
      std::ostringstream csv;
      write_summary_csv(csv, summary);
      return csv.str();
    },
    py::arg("settings"), "Runs a beta sweep from key = value settings and returns the summary CSV text.");
  m.def(
    "run_m_sweep",
    [](py::dict const &settings) {
      auto const summary = run_m_sweep(spec_from(settings));
      std::ostringstream csv;
      write_summary_csv(csv, summary);
      return csv.str();
    },
    py::arg("settings"));
}
