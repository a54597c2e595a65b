#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nsslip/run.hpp"

namespace py = pybind11;
using namespace nsslip;

namespace {

ExperimentConfig config_from(const std::string& text) { return parse_config(text); }

Eigen::VectorXd spectrum(int nx, int ny, int n, double alpha) {
  DomainSpec d;
  d.nx = nx;
  d.ny = ny;
  Geometry g = build_geometry(d);
  DiscreteOperators ops = assemble_operators(g.grid, g.mesh, alpha, 1.0);
  return stokes_eigenbasis(ops, n).lambda;
}

py::dict evaluate_config(const std::string& text) {
  ExperimentConfig cfg = config_from(text);
  auto model = build_model(cfg.model);
  Problem pb = make_problem(cfg, model);
  ControlPair u = project_admissible(make_controls(cfg.initial_controls, *model), cfg.set, model->ops->mesh);
  Evaluation e = evaluate(pb, u);
  GradientResult g = gradient(pb, e);
  py::dict out;
  out["cost"] = e.cost.total;
  out["tracking"] = e.cost.tracking;
  out["stderr"] = e.cost.stderr_total;
  out["grad_a"] = g.gradient.g.a;
  out["grad_b"] = g.gradient.g.b;
  out["pg_norm"] = projected_gradient_norm(*model, u, g.gradient.g, cfg.set);
  return out;
}

py::list verify(const std::string& text) {
  std::ostringstream log;
  VerifyReport rep = run_verify_suite(config_from(text), log);
  py::list out;
  for (const auto& c : rep.checks) {
    py::dict d;
    d["name"] = c.name;
    d["status"] = c.status;
    py::dict m;
    for (const auto& [k, v] : c.metrics) m[py::str(k)] = v;
    d["metrics"] = m;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Boundary control of stochastic Navier-Stokes flow with slip conditions";
  m.attr("__version__") = version_string();
  m.def("normalize_config", [](const std::string& text) { return serialize_config(config_from(text)); },
        py::arg("config_json"), "Parse, validate and re-serialize a config.");
  m.def("spectrum", &spectrum, py::arg("nx"), py::arg("ny"), py::arg("n"), py::arg("alpha") = 0.0,
        "Smallest discrete Stokes eigenvalues on the unit-viscosity rectangle.");
  m.def("evaluate", &evaluate_config, py::arg("config_json"),
        "Cost and gradient at the configured initial controls.");
  m.def("verify", &verify, py::arg("config_json"));
  m.def(
      "run",
      [](const std::string& command, const std::string& text, const std::string& out_dir) {
        ExperimentConfig cfg = config_from(text);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        std::ostringstream log;
        int rc = run_command(command, cfg, log);
        return py::make_tuple(rc, log.str());
      },
      py::arg("command"), py::arg("config_json"), py::arg("out_dir") = "");
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<BlowUpError>(m, "BlowUpError", PyExc_FloatingPointError);
}
