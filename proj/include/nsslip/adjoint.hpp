#pragma once

#include "nsslip/dynamics.hpp"

namespace nsslip {

// Target y_d = E cd + fd. cd is either shared (one entry) or one per sample.
struct Target {
  std::vector<Mat> cd;  // n x (N+1)
  Mat fd;               // full x (N+1)

  bool per_sample() const { return cd.size() > 1; }
  const Mat& coeff(int sample) const { return cd.size() == 1 ? cd[0] : cd.at(sample); }
};

Target zero_target(const Model& model);
Target field_target(const Model& model, const Mat& field);
// Reachable target: the state of a recorded ensemble, sample by sample.
Target ensemble_target(const Model& model, const Ensemble& ensemble);

// Control-dependent pieces of the tracking term, with R = A - fd.
struct TrackingData {
  Mat rproj;   // n x (N+1), E^T M R
  Mat lmr;     // inputs x (N+1), L^T M R
  Vec rnorm2;  // |R_k|_M^2
};

TrackingData make_tracking(const Model& model, const LiftedControls& lifted, const Target& target);

// Coefficients of E^T M (y - y_d) at node k.
Vec tracking_source(const ForwardTrajectory& tr, const TrackingData& td, const Target& target, int sample, int k);
// 1/2 sum_k w_k dt |y_k - y_d,k|_M^2 for one sample.
double tracking_cost(const Model& model, const ForwardTrajectory& tr, const TrackingData& td, const Target& target,
                     int sample);

enum class AdjointSolver { Pathwise, Regression };
std::string to_string(AdjointSolver s);
AdjointSolver adjoint_solver_from_string(const std::string& s);

enum class FeatureMap { Linear, Quadratic };
std::string to_string(FeatureMap f);
FeatureMap feature_map_from_string(const std::string& s);

struct RegressionSpec {
  FeatureMap features = FeatureMap::Linear;
  double ridge = 0.0;
  int quadratic_cap = 32;
};

struct AdjointPair {
  Mat p;        // n x (N+1), p_N = 0
  Mat s;        // n x N, (conditional expectation of) S lambda_{k+1}
  Mat eta;      // n x N, noise contribution to the backward step
  Mat q;        // (n*m) x N, regression only, channel j in rows j*n..j*n+n-1
  Vec lambda0;  // p_0 + w_0 dt U_0
  std::string tag;
};

struct AdjointEnsemble {
  AdjointSolver solver = AdjointSolver::Pathwise;
  std::vector<AdjointPair> paths;
  Vec martingale_residual;  // per step, |mean(S lambda - s - sum_j q^j dW^j)|
  int features = 0;
};

// Exact transpose of the linearized forward step along one path.
AdjointPair adjoint_solve_deterministic(const Model& model, const ForwardTrajectory& tr, const TrackingData& td,
                                        const Target& target, int sample = 0);

AdjointEnsemble adjoint_solve_regression(const Model& model, const Ensemble& ens, const TrackingData& td,
                                         const Target& target, const RegressionSpec& spec, int threads);

AdjointEnsemble adjoint_solve(const Model& model, const Ensemble& ens, const TrackingData& td, const Target& target,
                              AdjointSolver solver, const RegressionSpec& spec, int threads);

// d(mean tracking cost)/d(theta_k) over the given samples, inputs x (N+1).
Mat boundary_sensitivity(const Model& model, const LiftedControls& lifted, const TrackingData& td, const Target& target,
                         const Ensemble& ens, const AdjointEnsemble& adj, const std::vector<int>& samples);

class PressureSolver {
 public:
  explicit PressureSolver(const DiscreteOperators& ops);
  // Zero-mean cell field pi minimizing |r - grad pi| on interior faces.
  Vec solve(const Vec& strong_residual) const;
  // Weighted divergence of the part of r not absorbed by grad pi.
  Vec divergence_defect(const Vec& strong_residual, const Vec& pi) const;

 private:
  const DiscreteOperators& ops_;
  SpMat grad_;
  Vec w_;
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt_;
};

// Strong-form residual nu Lap p + (convective adjoint) + U + noise term on faces.
Vec adjoint_strong_residual(const Model& model, const Vec& p_field, const Vec& y_field, const Vec& u_field,
                            const Vec& noise_coeff);

Vec recover_pressure(const Model& model, const PressureSolver& solver, const Vec& p_field, const Vec& y_field,
                     const Vec& u_field, const Vec& noise_coeff);

struct AdjointBoundaryData {
  Mat pressure;        // nodes x (N+1)
  Mat normal_stress;   // (2 nu D(p) n).n
  Mat tangential;      // p.tau
  Mat state_tangential;  // y.tau
};

AdjointBoundaryData boundary_terms(const Model& model, const AdjointPair& adj, const ForwardTrajectory& tr,
                                   const Target& target, const TrackingData& td, int sample);

Vec normal_stress_at_nodes(const DiscreteOperators& ops, const Vec& field);

enum class DualityMode { PathwiseDet, Expectation };

struct DualityReport {
  DualityMode mode = DualityMode::PathwiseDet;
  double lhs = 0.0, rhs = 0.0;
  double defect = 0.0;     // mean(lhs - rhs)
  double relative = 0.0;   // |defect| / scale
  double stderr_ = 0.0;
  int samples = 0;
};

// lhs: sum_k w_k dt (z_k, U_k); rhs: the boundary pairing of the adjoint data with (f, g).
DualityReport duality_check(const Model& model, const Ensemble& ens, const std::vector<LinearizedTrajectory>& lin,
                            const AdjointEnsemble& adj, const TrackingData& td, const Target& target,
                            DualityMode mode);

}  // namespace nsslip
