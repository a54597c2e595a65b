#pragma once

#include <memory>

#include "nsslip/control_pair.hpp"
#include "nsslip/convection.hpp"
#include "nsslip/noise.hpp"

namespace nsslip {

struct TimeGrid {
  double horizon = 1.0;
  int steps = 256;
  double dt = 1.0 / 256;

  double time(int k) const { return k * dt; }
  // Trapezoid weight of node k (multiply by dt).
  double weight(int k) const { return (k == 0 || k == steps) ? 0.5 : 1.0; }
};

TimeGrid make_time_grid(double horizon, int steps);

struct BrownianPath {
  std::uint64_t seed = 0;
  Mat dw;  // m x steps
  int channels() const { return static_cast<int>(dw.rows()); }
};

BrownianPath sample_brownian(std::uint64_t seed, int m, const TimeGrid& grid);
std::uint64_t derived_seed(std::uint64_t base, int sample);

struct ModelSpec {
  DomainSpec domain;
  double nu = 0.1;
  double alpha = 0.5;
  double horizon = 1.0;
  int steps = 256;
  int n = 16;
  bool convection = true;
  NoiseSpec noise;
  double ceiling = 1e6;
};

// Everything precomputed once per configuration and shared read-only.
struct Model {
  ModelSpec spec;
  std::shared_ptr<const DiscreteOperators> ops;
  GalerkinBasis basis;
  std::shared_ptr<const LiftingSolver> lifting;
  LiftingMap lift;
  std::shared_ptr<const Trilinear> tri;
  ConvectionTensors tensors;
  TimeGrid time;
  NoiseModel noise;
  Vec implicit;      // diag (I + nu dt Lambda)^{-1}
  Mat lme;           // L^T M E
  Mat basis_tangent; // tangential traces of the basis, nodes x n

  int n() const { return basis.n; }
  int nodes() const { return ops->n_nodes; }
  int inputs() const { return 2 * ops->n_nodes; }
};

std::shared_ptr<const Model> build_model(const ModelSpec& spec);

struct LiftedControls {
  Mat field;     // full x (N+1)
  Mat proj;      // n x (N+1), M-projection onto the basis
  Mat normal;    // nodes x (N+1), normal trace
  std::vector<Mat> coupling;     // b(e_l; A, e_i) + b(A; e_l, e_i)
  std::vector<Mat> coupling_adv; // b(A; e_l, e_i)
  Mat self;      // n x (N+1), b(A; A, e_i)
};

std::shared_ptr<const LiftedControls> lift_controls(const Model& model, const ControlPair& controls);

struct EnergyLedger {
  Vec dissipation, numerical, lifting_work, noise_work, convection_increment, coupling, boundary_work, defect;
};

struct ForwardTrajectory {
  Mat c;  // homogeneous coefficients, n x (N+1)
  BrownianPath path;
  EnergyLedger ledger;
  std::shared_ptr<const LiftedControls> lifted;

  Vec projected(int k) const { return c.col(k) + lifted->proj.col(k); }
};

Vec convection_term(const Model& model, const LiftedControls& lifted, int k, const Vec& c);

ForwardTrajectory forward_solve(const Model& model, const Vec& y0, std::shared_ptr<const LiftedControls> lifted,
                                const BrownianPath& path, int sample = 0);

struct Ensemble {
  std::vector<ForwardTrajectory> paths;
  std::uint64_t seed = 0;
  int size() const { return static_cast<int>(paths.size()); }
};

Ensemble forward_ensemble(const Model& model, const Vec& y0, std::shared_ptr<const LiftedControls> lifted,
                          std::uint64_t base_seed, int samples, int threads);

struct LiftedDirection {
  ControlPair direction;
  Mat field, proj;
  std::vector<Mat> coupling;  // same structure as LiftedControls::coupling, for F
  Mat cross;                  // n x (N+1), b(F; A, e_i) + b(A; F, e_i)
};

std::shared_ptr<const LiftedDirection> lift_direction(const Model& model, const LiftedControls& base,
                                                      const ControlPair& direction);

struct LinearizedTrajectory {
  Mat zeta;   // n x (N+1)
  Mat load;   // n x N, B_k F_k, the lifting part of the linearized convection
  std::shared_ptr<const LiftedDirection> direction;
  std::uint64_t seed = 0;
};

LinearizedTrajectory linearized_solve(const Model& model, const ForwardTrajectory& state,
                                      std::shared_ptr<const LiftedDirection> direction);

struct GateauxRow {
  double eps = 0.0;
  double mean_h = 0.0, stderr_h = 0.0;
  double mean_v = 0.0, stderr_v = 0.0;
  int blowups = 0;
};

std::vector<GateauxRow> gateaux_check(const Model& model, const Vec& y0, const ControlPair& base,
                                      const ControlPair& direction, const std::vector<double>& eps, int samples,
                                      std::uint64_t seed, int threads);

enum class WeightKind { Xi0, Xi1, Xi2, Beta };
std::string to_string(WeightKind k);

struct WeightConstants {
  double c0 = 0.1, c1 = 0.1, c2 = 0.1, ct1 = 0.1, ct2 = 0.1;
};

struct WeightProcess {
  WeightKind kind = WeightKind::Xi0;
  double constant = 0.0;
  Vec xi;
};

WeightProcess weight_path(WeightKind kind, const WeightConstants& constants, const Model& model,
                          const ForwardTrajectory& trajectory, const ControlPair& controls);

struct IntegrabilityConstants {
  double nu = 0.1, bound_l = 0.0, r_star = 0.0, a_star = 0.0, b_star = 0.0, c_hat = 1.0, horizon = 1.0;
  double lambda_star(double t) const;
};

struct ExpMomentReport {
  std::array<double, 4> mean{}, stderr_{}, max_exponent{};
  std::array<bool, 4> heavy_tail{}, capped{};
  int samples = 0;
};

ExpMomentReport exp_integrability_stats(const Model& model, const std::vector<const ForwardTrajectory*>& trajectories,
                                        const IntegrabilityConstants& constants);

}  // namespace nsslip
