#pragma once

#include <string>

#include "nsslip/control.hpp"

namespace nsslip {

// Boundary control shape: a = A cos(2 pi m_a s/|G|)(1 + g t), b = B sin(2 pi m_b s/|G|)(1 + g t).
struct ControlShape {
  std::string kind = "zero";  // zero | shape | file
  double a_amplitude = 0.0, b_amplitude = 0.0;
  int a_mode = 1, b_mode = 1;
  double growth = 0.0;
  std::string path;  // controls JSON written by a previous optimize run
};

struct TargetSpec {
  // zero | uncontrolled | known_control | recorded | vortex
  std::string kind = "zero";
  ControlShape control;  // known_control
  std::string path;      // recorded: controls JSON, replayed with the same seeds
  double amplitude = 0.0;  // vortex: u = A sin(k pi x) cos(k pi y)(1 + g t), v = -A cos(k pi x) sin(k pi y)(1 + g t)
  int wavenumber = 1;
  double growth = 0.0;
};

struct VerifySpec {
  int gateaux_samples = 256;
  std::vector<double> gateaux_eps{1e-1, 5e-2, 2.5e-2, 1.25e-2, 6e-3, 3e-3};
  double direction_scale = 0.05;
  int duality_samples = 512;
  int fd_directions = 3;
  double fd_step = 1e-5;
  int noise_samples = 1000;
  int lifting_trials = 10;
  std::string fault = "none";  // none | adjoint_sign
};

struct ExperimentConfig {
  ModelSpec model;
  std::vector<double> initial_state;  // basis coefficients, zero padded
  CostParams cost;
  AdmissibleSet set;
  ControlShape initial_controls;
  TargetSpec target;
  int samples = 256;
  std::uint64_t seed = 1;
  AdjointSolver solver = AdjointSolver::Pathwise;
  RegressionSpec regression;
  PgdOptions optimizer;
  VerifySpec verify;
  std::string output_dir = "runs/latest";
  int threads = 1;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

Vec initial_state(const ExperimentConfig& cfg);
ControlPair make_controls(const ControlShape& shape, const Model& model);
ControlPair load_controls(const std::string& path, const Model& model);
std::string controls_json(const ControlPair& c, const std::string& status, double cost);

Mat vortex_field(const Model& model, const TargetSpec& spec);
// Builds the target; recorded and uncontrolled targets replay the configured seeds.
Target make_target(const ExperimentConfig& cfg, const Model& model);

Problem make_problem(const ExperimentConfig& cfg, std::shared_ptr<const Model> model);

}  // namespace nsslip
