#pragma once

#include <optional>

#include "nsslip/adjoint.hpp"

namespace nsslip {

struct CostParams {
  double lambda_a = 1e-2;
  double lambda_b = 1e-2;
};

struct AdmissibleSet {
  double b_inf = 1.0;
  double b_h = 0.0;  // per-time surrogate-norm cap, 0 disables it
};

// <u, v> = sum_k w_k dt sum_q w_q (u_a v_a + u_b v_b)
double gamma_inner(const Model& model, const ControlPair& u, const ControlPair& v);
double gamma_norm(const Model& model, const ControlPair& u);

ControlPair project_admissible(const ControlPair& controls, const AdmissibleSet& set, const BoundaryMesh& mesh);

struct CostBreakdown {
  double tracking = 0.0, control_a = 0.0, control_b = 0.0, total = 0.0;
  double stderr_tracking = 0.0, stderr_total = 0.0;
  int samples = 0;
};

CostBreakdown evaluate_cost(const Model& model, const ControlPair& controls, const Target& target,
                            const Ensemble& ens, const TrackingData& td, const CostParams& params);

struct GradientPair {
  ControlPair g;        // full gradient density
  ControlPair sigma;    // adjoint part, g = lambda * controls + sigma
  ControlPair stderr_;  // batch-means standard errors
};

GradientPair assemble_gradient(const Model& model, const ControlPair& controls, const LiftedControls& lifted,
                               const TrackingData& td, const Target& target, const Ensemble& ens,
                               const AdjointEnsemble& adj, const CostParams& params, int batches = 8);

double projected_gradient_norm(const Model& model, const ControlPair& controls, const ControlPair& g,
                               const AdmissibleSet& set);

// Everything needed to evaluate J and its gradient with common random numbers.
struct Problem {
  std::shared_ptr<const Model> model;
  Vec y0;
  Target target;
  CostParams cost;
  AdmissibleSet set;
  int samples = 1;
  std::uint64_t seed = 0;
  AdjointSolver solver = AdjointSolver::Pathwise;
  RegressionSpec regression;
  int threads = 1;
};

struct Evaluation {
  ControlPair controls;
  std::shared_ptr<const LiftedControls> lifted;
  TrackingData td;
  Ensemble ens;
  CostBreakdown cost;
};

Evaluation evaluate(const Problem& problem, const ControlPair& controls);

struct GradientResult {
  GradientPair gradient;
  AdjointEnsemble adjoint;
};

GradientResult gradient(const Problem& problem, const Evaluation& eval);

struct PgdOptions {
  int max_iters = 50;
  double tol_g = 1e-6;
  double armijo_c1 = 1e-4;
  int max_backtracks = 30;
  double initial_step = 1.0;
};

struct TraceRow {
  int iteration = 0;
  double j = 0.0, stderr_ = 0.0, step = 0.0, pg_norm = 0.0;
  int backtracks = 0;
  double wall = 0.0;
};

struct PgdResult {
  ControlPair controls;
  GradientPair gradient;
  CostBreakdown cost;
  std::vector<TraceRow> trace;
  std::string status;
};

PgdResult optimize_pgd(const Problem& problem, const ControlPair& initial, const PgdOptions& options);

struct OptimalityReport {
  double residual = 0.0;    // min over probes of the variational-inequality pairing
  double normalized = 0.0;  // min over probes of pairing / probe scale
  double scale = 0.0;       // largest probe scale
  int probes = 0;
};

OptimalityReport optimality_residual(const Model& model, const ControlPair& controls, const GradientPair& g,
                                     const AdmissibleSet& set, const CostParams& params, int probes,
                                     std::uint64_t seed);

// Exact minimizer of the linear-quadratic problem (no convection, ZERO noise, inactive bounds).
ControlPair normal_equations_solution(const Problem& problem);

struct ConstantsLedger {
  WeightConstants fitted;
  double c_hat = 0.0;
  double nu = 0.0, bound_l = 0.0, k_lip = 0.0, horizon = 0.0;
  double n_sup = 0.0, r_star = 0.0;
  double lambda_star0 = 0.0, lambda_star_t = 0.0, a_star = 0.0, beta_star0 = 0.0, beta_star_t = 0.0, b_star = 0.0;
  std::string verdict_cf, verdict_ca1, verdict_cnd1;
  double lhs_cf = 0.0, rhs_cf = 0.0, lhs_ca1 = 0.0, rhs_ca1 = 0.0, lhs_cnd1 = 0.0, rhs_cnd1 = 0.0;
  std::vector<std::string> surrogate;
};

// Empirical Gronwall-rate fits from forward, linearized and adjoint runs.
WeightConstants fit_weight_constants(const Problem& problem, const Evaluation& eval, const AdjointEnsemble& adj,
                                     int samples);

double admissible_norm_bound(const Model& model, const AdmissibleSet& set);

ConstantsLedger constants_report(const Model& model, const AdmissibleSet& set, const WeightConstants& fitted,
                                 double c_hat, double k_lip);

IntegrabilityConstants integrability_constants(const ConstantsLedger& ledger);

}  // namespace nsslip
