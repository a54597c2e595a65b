#pragma once

#include <string>

#include "nsslip/operators.hpp"

namespace nsslip {

enum class NoiseFamily { Zero, AdditiveDamped, MultiplicativeDamped };

std::string to_string(NoiseFamily f);
NoiseFamily noise_family_from_string(const std::string& s);

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::Zero;
  int channels = 0;
  double bound_l = 0.0;
  double fill = 0.9;                // fraction of L used by the amplitude budget
  double multiplicative_share = 0.5;
  std::uint64_t seed = 7;
};

// G^k(y) = c_k rho(|y|)^2 M_k y + d_k rho(|y|) phi_k,  rho(s) = (1+s^2)^{-1/2}
struct NoiseModel {
  NoiseFamily family = NoiseFamily::Zero;
  int m = 0;
  int n = 0;
  double bound_l = 0.0;
  Vec c, d;
  std::vector<Mat> mk;
  std::vector<Vec> phi;
};

NoiseModel make_noise_model(const NoiseSpec& spec, int n);

// Channels as columns (n x m).
Mat evaluate_G(const NoiseModel& model, double t, const Vec& y);
Mat apply_G_jacobian(const NoiseModel& model, double t, const Vec& y, const Vec& v);
Vec apply_G_jacobian_adjoint(const NoiseModel& model, double t, const Vec& y, const Mat& q);

// sum_j G^j(y) dw_j and friends, for the time steppers.
Vec noise_increment(const NoiseModel& model, const Vec& y, const Eigen::Ref<const Vec>& dw);
Vec noise_jacobian_increment(const NoiseModel& model, const Vec& y, const Vec& v, const Eigen::Ref<const Vec>& dw);
Vec noise_adjoint_increment(const NoiseModel& model, const Vec& y, const Vec& s, const Eigen::Ref<const Vec>& dw);

double amplitude_budget(const NoiseModel& model);

struct NoiseAssumptionReport {
  double k_est = 0.0;
  double l_est = 0.0;
  double jacobian_h = 0.0;
  double jacobian_v = 0.0;
  double frechet_slope = 0.0;
  bool remainder_vanishes = false;
  double adjoint_defect = 0.0;
  int samples = 0;
};

NoiseAssumptionReport validate_assumptions(const NoiseModel& model, const GalerkinBasis& basis, int samples,
                                           std::uint64_t seed = 99);

}  // namespace nsslip
