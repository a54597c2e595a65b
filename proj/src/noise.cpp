#include "nsslip/noise.hpp"

#include <cmath>
#include <random>

namespace nsslip {

std::string to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::Zero: return "ZERO";
    case NoiseFamily::AdditiveDamped: return "ADDITIVE_DAMPED";
    case NoiseFamily::MultiplicativeDamped: return "MULTIPLICATIVE_DAMPED";
  }
  return "ZERO";
}

NoiseFamily noise_family_from_string(const std::string& s) {
  if (s == "ZERO") return NoiseFamily::Zero;
  if (s == "ADDITIVE_DAMPED") return NoiseFamily::AdditiveDamped;
  if (s == "MULTIPLICATIVE_DAMPED") return NoiseFamily::MultiplicativeDamped;
  throw ConfigError("unknown noise family '" + s + "'");
}

NoiseModel make_noise_model(const NoiseSpec& spec, int n) {
  NoiseModel model;
  model.family = spec.family;
  model.n = n;
  model.bound_l = spec.bound_l;
  if (spec.family == NoiseFamily::Zero) return model;
  if (spec.channels < 1) throw ConfigError("noise: channels must be >= 1 for a nonzero family");
  if (!(spec.bound_l > 0.0)) throw ConfigError("noise: L must be positive for a nonzero family");
  if (!(spec.fill > 0.0 && spec.fill <= 1.0)) throw ConfigError("noise: fill must lie in (0, 1]");

  model.m = spec.channels;
  std::mt19937_64 rng(splitmix64(spec.seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  double share = spec.family == NoiseFamily::MultiplicativeDamped ? spec.multiplicative_share : 0.0;
  if (share < 0.0 || share > 1.0) throw ConfigError("noise: multiplicative_share must lie in [0, 1]");
  double per_channel = std::sqrt(spec.fill * spec.bound_l / model.m);
  model.c = Vec::Constant(model.m, share * per_channel);
  model.d = Vec::Constant(model.m, (1.0 - share) * per_channel);
  for (int k = 0; k < model.m; ++k) {
    Vec phi(n);
    for (int i = 0; i < n; ++i) phi[i] = normal(rng) / std::sqrt(1.0 + i);
    model.phi.push_back(phi / phi.norm());
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
    Mat s = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(s);
    model.mk.push_back(s / es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return model;
}

Mat evaluate_G(const NoiseModel& model, double, const Vec& y) {
  Mat g = Mat::Zero(y.size(), model.m);
  if (model.m == 0) return g;
  double r2 = 1.0 / (1.0 + y.squaredNorm());
  double r = std::sqrt(r2);
  for (int k = 0; k < model.m; ++k) g.col(k) = model.c[k] * r2 * (model.mk[k] * y) + model.d[k] * r * model.phi[k];
  return g;
}

Mat apply_G_jacobian(const NoiseModel& model, double, const Vec& y, const Vec& v) {
  Mat g = Mat::Zero(y.size(), model.m);
  if (model.m == 0) return g;
  double q = 1.0 + y.squaredNorm();
  double yv = y.dot(v);
  for (int k = 0; k < model.m; ++k)
    g.col(k) = model.c[k] * ((model.mk[k] * v) / q - 2.0 * yv / (q * q) * (model.mk[k] * y)) -
               model.d[k] * yv * std::pow(q, -1.5) * model.phi[k];
  return g;
}

Vec apply_G_jacobian_adjoint(const NoiseModel& model, double, const Vec& y, const Mat& qm) {
  Vec out = Vec::Zero(y.size());
  if (model.m == 0) return out;
  if (qm.cols() != model.m) throw std::invalid_argument("adjoint input must have one column per channel");
  double q = 1.0 + y.squaredNorm();
  for (int k = 0; k < model.m; ++k) {
    Vec my = model.mk[k] * y;
    out += model.c[k] * ((model.mk[k].transpose() * qm.col(k)) / q - 2.0 * my.dot(qm.col(k)) / (q * q) * y);
    out -= model.d[k] * std::pow(q, -1.5) * model.phi[k].dot(qm.col(k)) * y;
  }
  return out;
}

Vec noise_increment(const NoiseModel& model, const Vec& y, const Eigen::Ref<const Vec>& dw) {
  if (model.m == 0) return Vec::Zero(y.size());
  return evaluate_G(model, 0.0, y) * dw;
}

Vec noise_jacobian_increment(const NoiseModel& model, const Vec& y, const Vec& v, const Eigen::Ref<const Vec>& dw) {
  if (model.m == 0) return Vec::Zero(y.size());
  return apply_G_jacobian(model, 0.0, y, v) * dw;
}

Vec noise_adjoint_increment(const NoiseModel& model, const Vec& y, const Vec& s, const Eigen::Ref<const Vec>& dw) {
  if (model.m == 0) return Vec::Zero(y.size());
  return apply_G_jacobian_adjoint(model, 0.0, y, s * dw.transpose());
}

double amplitude_budget(const NoiseModel& model) {
  double s = 0.0;
  for (int k = 0; k < model.m; ++k) {
    double e = model.c[k] * model.mk[k].operatorNorm() + model.d[k] * model.phi[k].norm();
    s += e * e;
  }
  return s;
}

NoiseAssumptionReport validate_assumptions(const NoiseModel& model, const GalerkinBasis& basis, int samples,
                                           std::uint64_t seed) {
  if (samples < 100) throw std::invalid_argument("validate_assumptions needs at least 100 samples");
  NoiseAssumptionReport rep;
  rep.samples = samples;
  const int n = model.n;
  if (basis.n != n) throw std::invalid_argument("noise model and basis disagree on the basis size");
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto direction = [&]() {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
    return Vec(v / v.norm());
  };
  auto radius = [&](double lo, double hi) { return std::exp(std::log(lo) + unif(rng) * (std::log(hi) - std::log(lo))); };
  Vec sqrt_lambda = basis.lambda.cwiseSqrt();
  auto vnorm = [&](const Mat& g) { return (sqrt_lambda.asDiagonal() * g).norm(); };

  std::string witness;
  for (int s = 0; s < samples; ++s) {
    Vec y = s == 0 ? Vec::Zero(n) : Vec(direction() * radius(1e-3, 1e3));
    double l = (1.0 + y.squaredNorm()) * evaluate_G(model, 0.0, y).squaredNorm();
    if (l > rep.l_est) {
      rep.l_est = l;
      witness = "|y| = " + fmt17(y.norm());
    }

    Vec v = direction() * radius(1e-2, 1e2);
    Vec z = unif(rng) < 0.5 ? Vec(direction() * radius(1e-2, 1e2)) : Vec(v + direction() * radius(1e-6, 1e-1));
    double dist = (v - z).norm();
    if (dist > 0)
      rep.k_est = std::max(rep.k_est, (evaluate_G(model, 0.0, v) - evaluate_G(model, 0.0, z)).norm() / dist);

    Vec w = direction();
    rep.jacobian_h = std::max(rep.jacobian_h, apply_G_jacobian(model, 0.0, y, w).norm());
    Vec wv = w.cwiseQuotient(sqrt_lambda);
    rep.jacobian_v = std::max(rep.jacobian_v, vnorm(apply_G_jacobian(model, 0.0, y, wv)) / vnorm(wv));

    if (model.m > 0) {
      Mat q(n, model.m);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < model.m; ++k) q(i, k) = normal(rng);
      double lhs = (apply_G_jacobian(model, 0.0, y, w).cwiseProduct(q)).sum();
      double rhs = w.dot(apply_G_jacobian_adjoint(model, 0.0, y, q));
      double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
      rep.adjoint_defect = std::max(rep.adjoint_defect, std::abs(lhs - rhs) / scale);
    }
  }

  const std::vector<double> eps{1e-1, 5e-2, 2.5e-2, 1.25e-2};
  std::vector<double> total(eps.size(), 0.0);
  for (int s = 0; s < 32; ++s) {
    Vec y = direction() * radius(0.3, 3.0);
    Vec v = direction();
    Mat g0 = evaluate_G(model, 0.0, y), jv = apply_G_jacobian(model, 0.0, y, v);
    for (size_t e = 0; e < eps.size(); ++e)
      total[e] += (evaluate_G(model, 0.0, y + eps[e] * v) - g0 - eps[e] * jv).norm();
  }
  if (total.front() == 0.0) {
    rep.remainder_vanishes = true;
  } else {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t e = 0; e < eps.size(); ++e) {
      double x = std::log(eps[e]), yv = std::log(total[e]);
      sx += x;
      sy += yv;
      sxx += x * x;
      sxy += x * yv;
    }
    double ne = static_cast<double>(eps.size());
    rep.frechet_slope = (ne * sxy - sx * sy) / (ne * sxx - sx * sx);
  }

  if (rep.l_est > model.bound_l * (1.0 + 1e-6) && model.m > 0)
    throw AssumptionViolation("noise bound violated: sampled (1+|y|^2)|G|^2 = " + fmt17(rep.l_est) +
                              " exceeds L = " + fmt17(model.bound_l) + " at " + witness);
  return rep;
}

}  // namespace nsslip
