#include "nsslip/control.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace nsslip {

double gamma_inner(const Model& model, const ControlPair& u, const ControlPair& v) {
  const Vec& w = model.ops->mesh.weight;
  CompensatedSum s;
  for (int k = 0; k < u.time_nodes(); ++k) {
    double tw = model.time.weight(k) * model.time.dt;
    s.add(tw * (w.cwiseProduct(u.a.col(k)).dot(v.a.col(k)) + w.cwiseProduct(u.b.col(k)).dot(v.b.col(k))));
  }
  return s.value();
}

double gamma_norm(const Model& model, const ControlPair& u) { return std::sqrt(std::max(0.0, gamma_inner(model, u, u))); }

namespace {

// Weighted projection of x onto {|a| <= B, sum w a = 0}: a = clip(x - mu).
Vec project_compatible_box(const Vec& x, double bound, const Vec& w) {
  const double wsum = w.sum();
  if (x.cwiseAbs().maxCoeff() <= bound && std::abs(w.dot(x)) <= 1e-15 * w.dot(x.cwiseAbs()))
    return x;
  auto flux = [&](double mu) {
    double s = 0.0;
    for (Eigen::Index q = 0; q < x.size(); ++q) s += w[q] * std::clamp(x[q] - mu, -bound, bound);
    return s;
  };
  double lo = x.minCoeff() - bound, hi = x.maxCoeff() + bound;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    double mid = 0.5 * (lo + hi);
    (flux(mid) > 0.0 ? lo : hi) = mid;
  }
  double mu = 0.5 * (lo + hi);
  // Exact solve on the free set identified by bisection.
  double wf = 0.0, num = 0.0;
  for (Eigen::Index q = 0; q < x.size(); ++q) {
    double v = x[q] - mu;
    if (v >= bound) num += w[q] * bound;
    else if (v <= -bound) num -= w[q] * bound;
    else {
      wf += w[q];
      num += w[q] * x[q];
    }
  }
  if (wf > 1e-14 * wsum) mu = num / wf;
  Vec a(x.size());
  for (Eigen::Index q = 0; q < x.size(); ++q) a[q] = std::clamp(x[q] - mu, -bound, bound);
  return a;
}

}  // namespace

ControlPair project_admissible(const ControlPair& c, const AdmissibleSet& set, const BoundaryMesh& mesh) {
  if (!(set.b_inf > 0.0)) throw std::invalid_argument("admissible set needs B_inf > 0");
  ControlPair out = c;
  for (int k = 0; k < c.time_nodes(); ++k) {
    out.a.col(k) = project_compatible_box(c.a.col(k), set.b_inf, mesh.weight);
    out.b.col(k) = c.b.col(k).cwiseMax(-set.b_inf).cwiseMin(set.b_inf);
    if (set.b_h > 0.0) {
      double nrm = out.surrogate_norm_at(k, mesh);
      if (nrm > set.b_h) {
        out.a.col(k) *= set.b_h / nrm;
        out.b.col(k) *= set.b_h / nrm;
      }
    }
  }
  return out;
}

CostBreakdown evaluate_cost(const Model& model, const ControlPair& controls, const Target& target,
                            const Ensemble& ens, const TrackingData& td, const CostParams& params) {
  if (controls.time_nodes() != model.time.steps + 1) throw std::invalid_argument("controls do not match the time grid");
  CostBreakdown cb;
  cb.samples = ens.size();
  std::vector<double> tr(ens.size());
  for (int s = 0; s < ens.size(); ++s) tr[s] = tracking_cost(model, ens.paths[s], td, target, s);
  MeanStats ms = mean_stats(tr);
  cb.tracking = ms.mean;
  cb.stderr_tracking = ms.stderr_;
  ControlPair za = ControlPair::zeros(controls.nodes(), controls.time_nodes());
  ControlPair only_a{controls.a, za.b}, only_b{za.a, controls.b};
  cb.control_a = 0.5 * params.lambda_a * gamma_inner(model, only_a, only_a);
  cb.control_b = 0.5 * params.lambda_b * gamma_inner(model, only_b, only_b);
  cb.total = cb.tracking + cb.control_a + cb.control_b;
  cb.stderr_total = cb.stderr_tracking;
  return cb;
}

namespace {

ControlPair density(const Model& model, const Mat& theta) {
  const int p = model.nodes();
  const Vec& w = model.ops->mesh.weight;
  ControlPair d = ControlPair::from_stacked(theta);
  for (int k = 0; k < theta.cols(); ++k) {
    double tw = model.time.weight(k) * model.time.dt;
    for (int q = 0; q < p; ++q) {
      d.a(q, k) /= tw * w[q];
      d.b(q, k) /= tw * w[q];
    }
  }
  return d;
}

}  // namespace

GradientPair assemble_gradient(const Model& model, const ControlPair& controls, const LiftedControls& lifted,
                               const TrackingData& td, const Target& target, const Ensemble& ens,
                               const AdjointEnsemble& adj, const CostParams& params, int batches) {
  const int m = ens.size();
  std::vector<int> all(m);
  for (int s = 0; s < m; ++s) all[s] = s;
  GradientPair g;
  g.sigma = density(model, boundary_sensitivity(model, lifted, td, target, ens, adj, all));
  g.g = ControlPair{params.lambda_a * controls.a + g.sigma.a, params.lambda_b * controls.b + g.sigma.b};
  g.stderr_ = ControlPair::zeros(controls.nodes(), controls.time_nodes());
  const int nb = std::min(batches, m);
  if (nb < 2) return g;
  std::vector<ControlPair> parts;
  for (int b = 0; b < nb; ++b) {
    std::vector<int> idx;
    for (int s = b * m / nb; s < (b + 1) * m / nb; ++s) idx.push_back(s);
    parts.push_back(density(model, boundary_sensitivity(model, lifted, td, target, ens, adj, idx)));
  }
  ControlPair mean = ControlPair::zeros(controls.nodes(), controls.time_nodes());
  for (const auto& p : parts) mean = mean + p * (1.0 / nb);
  for (const auto& p : parts) {
    g.stderr_.a += (p.a - mean.a).cwiseAbs2();
    g.stderr_.b += (p.b - mean.b).cwiseAbs2();
  }
  double f = 1.0 / (static_cast<double>(nb) * (nb - 1));
  g.stderr_.a = (g.stderr_.a * f).cwiseSqrt();
  g.stderr_.b = (g.stderr_.b * f).cwiseSqrt();
  return g;
}

double projected_gradient_norm(const Model& model, const ControlPair& controls, const ControlPair& g,
                               const AdmissibleSet& set) {
  ControlPair step = project_admissible(controls - g, set, model.ops->mesh);
  return gamma_norm(model, controls - step);
}

Evaluation evaluate(const Problem& pb, const ControlPair& controls) {
  const Model& model = *pb.model;
  Evaluation e;
  e.controls = controls;
  e.lifted = lift_controls(model, controls);
  e.td = make_tracking(model, *e.lifted, pb.target);
  e.ens = forward_ensemble(model, pb.y0, e.lifted, pb.seed, pb.samples, pb.threads);
  e.cost = evaluate_cost(model, controls, pb.target, e.ens, e.td, pb.cost);
  return e;
}

GradientResult gradient(const Problem& pb, const Evaluation& e) {
  const Model& model = *pb.model;
  GradientResult r;
  r.adjoint = adjoint_solve(model, e.ens, e.td, pb.target, pb.solver, pb.regression, pb.threads);
  r.gradient = assemble_gradient(model, e.controls, *e.lifted, e.td, pb.target, e.ens, r.adjoint, pb.cost);
  return r;
}

PgdResult optimize_pgd(const Problem& pb, const ControlPair& initial, const PgdOptions& opt) {
  const Model& model = *pb.model;
  const auto& mesh = model.ops->mesh;
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed = [&]() { return std::chrono::duration<double>(clock::now() - start).count(); };

  PgdResult res;
  Evaluation cur = evaluate(pb, project_admissible(initial, pb.set, mesh));
  GradientPair g = gradient(pb, cur).gradient;
  double step = opt.initial_step, used = 0.0;
  int backtracks = 0;
  res.status = "max_iters";
  for (int it = 0;; ++it) {
    double pg = projected_gradient_norm(model, cur.controls, g.g, pb.set);
    res.trace.push_back({it, cur.cost.total, cur.cost.stderr_total, used, pg, backtracks, elapsed()});
    if (pg <= opt.tol_g) {
      res.status = "converged";
      break;
    }
    if (it >= opt.max_iters) break;

    backtracks = 0;
    double s = step;
    std::optional<Evaluation> next;
    while (backtracks <= opt.max_backtracks) {
      ControlPair trial = project_admissible(cur.controls - g.g * s, pb.set, mesh);
      try {
        Evaluation e = evaluate(pb, trial);
        double decrease = gamma_inner(model, g.g, trial - cur.controls);
        if (e.cost.total <= cur.cost.total + opt.armijo_c1 * decrease) {
          next = std::move(e);
          break;
        }
      } catch (const BlowUpError&) {
      }
      s *= 0.5;
      ++backtracks;
    }
    if (!next) {
      res.status = "line_search_failed";
      break;
    }
    GradientPair gn = gradient(pb, *next).gradient;
    ControlPair dx = next->controls - cur.controls, dg = gn.g - g.g;
    double sy = gamma_inner(model, dx, dg), ss = gamma_inner(model, dx, dx);
    used = s;
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : 2.0 * s;
    cur = std::move(*next);
    g = std::move(gn);
  }
  res.controls = cur.controls;
  res.gradient = g;
  res.cost = cur.cost;
  return res;
}

OptimalityReport optimality_residual(const Model& model, const ControlPair& controls, const GradientPair& g,
                                     const AdmissibleSet& set, const CostParams& params, int probes,
                                     std::uint64_t seed) {
  if (probes < 1) throw std::invalid_argument("optimality residual needs at least one probe");
  const auto& mesh = model.ops->mesh;
  std::mt19937_64 rng(splitmix64(seed));
  double range = std::min(set.b_inf, 10.0 * (1.0 + std::max(controls.a.cwiseAbs().maxCoeff(), controls.b.cwiseAbs().maxCoeff())));
  std::uniform_real_distribution<double> unif(-range, range);
  ControlPair pen{params.lambda_a * controls.a, params.lambda_b * controls.b};
  double gscale = gamma_norm(model, g.sigma) + gamma_norm(model, pen);
  OptimalityReport rep;
  rep.probes = probes;
  rep.residual = std::numeric_limits<double>::infinity();
  rep.normalized = std::numeric_limits<double>::infinity();
  for (int p = 0; p < probes; ++p) {
    ControlPair f = ControlPair::zeros(controls.nodes(), controls.time_nodes());
    for (int k = 0; k < f.time_nodes(); ++k)
      for (int q = 0; q < f.nodes(); ++q) {
        f.a(q, k) = unif(rng);
        f.b(q, k) = unif(rng);
      }
    f = project_admissible(f, set, mesh);
    ControlPair d = f - controls;
    double val = gamma_inner(model, g.g, d);
    double scale = gamma_norm(model, d) * gscale;
    rep.residual = std::min(rep.residual, val);
    rep.scale = std::max(rep.scale, scale);
    if (scale > 0) rep.normalized = std::min(rep.normalized, val / scale);
  }
  if (!std::isfinite(rep.normalized)) rep.normalized = 0.0;
  return rep;
}

ControlPair normal_equations_solution(const Problem& pb) {
  const Model& model = *pb.model;
  if (model.spec.convection || model.noise.m != 0 || pb.target.per_sample())
    throw std::invalid_argument("normal equations need convection off, ZERO noise and a shared target");
  const int n = model.n(), steps = model.time.steps, nt = steps + 1, in = model.inputs();
  const int dim = in * nt;
  const double dt = model.time.dt;
  const Mat& lmat = model.lift.matrix;
  const Mat mel = model.basis.me * lmat;  // n x inputs
  const Vec& mass = model.ops->mass;
  Mat q = lmat.transpose() * mass.asDiagonal() * lmat - mel.transpose() * mel;

  // yhat_k = c_k + P_k with P = me L theta and c_{k+1} = S (c_k - (P_{k+1} - P_k)), c_0 = y0 - P_0.
  auto yhat = [&](const Mat& proj, const Vec& y0) {
    Mat c(n, nt);
    c.col(0) = y0 - proj.col(0);
    for (int k = 0; k < steps; ++k)
      c.col(k + 1) = model.implicit.cwiseProduct(c.col(k) - (proj.col(k + 1) - proj.col(k)));
    return Mat(c + proj);
  };
  Mat base = yhat(Mat::Zero(n, nt), pb.y0);
  const Mat& cd = pb.target.coeff(0);
  Mat ydhat = cd + model.basis.me * pb.target.fd;
  Mat resid = pb.target.fd - model.basis.e * (model.basis.me * pb.target.fd);
  Mat lres = lmat.transpose() * mass.asDiagonal() * resid;  // inputs x nt

  // Psi: n*nt x dim, column (k', r) is the response to a unit input r at node k'.
  Mat psi(n * nt, dim);
  for (int kk = 0; kk < nt; ++kk)
    for (int r = 0; r < in; ++r) {
      Mat proj = Mat::Zero(n, nt);
      proj.col(kk) = mel.col(r);
      Mat y = yhat(proj, Vec::Zero(n));
      psi.col(kk * in + r) = Eigen::Map<const Vec>(y.data(), n * nt);
    }
  Vec wt(n * nt);
  for (int k = 0; k < nt; ++k) wt.segment(k * n, n).setConstant(model.time.weight(k) * dt);
  Mat h = psi.transpose() * wt.asDiagonal() * psi;
  Vec target = Eigen::Map<const Vec>(Mat(ydhat - base).data(), n * nt);
  Vec rhs = psi.transpose() * wt.cwiseProduct(target);
  const Vec& w = model.ops->mesh.weight;
  for (int k = 0; k < nt; ++k) {
    double tw = model.time.weight(k) * dt;
    h.block(k * in, k * in, in, in) += tw * q;
    rhs.segment(k * in, in) += tw * lres.col(k);
    for (int r = 0; r < in; ++r) {
      double lam = r < model.nodes() ? pb.cost.lambda_a : pb.cost.lambda_b;
      h(k * in + r, k * in + r) += tw * lam * w[r % model.nodes()];
    }
  }
  Vec theta = h.ldlt().solve(rhs);
  Mat t = Eigen::Map<const Mat>(theta.data(), in, nt);
  return ControlPair::from_stacked(t);
}

namespace {

double growth_fit(const std::vector<double>& rates) {
  double best = 0.0;
  for (double r : rates) best = std::max(best, r);
  return best;
}

}  // namespace

WeightConstants fit_weight_constants(const Problem& pb, const Evaluation& e, const AdjointEnsemble& adj, int samples) {
  const Model& model = *pb.model;
  const auto& mesh = model.ops->mesh;
  const int steps = model.time.steps, nt = steps + 1, p = model.nodes();
  const double dt = model.time.dt, visc = 1.0 / model.spec.nu + 1.0;
  ControlPair dir = ControlPair::zeros(p, nt);
  for (int k = 0; k < nt; ++k)
    for (int q = 0; q < p; ++q) {
      double s = 2.0 * M_PI * mesh.arclength[q] / mesh.perimeter;
      dir.a(q, k) = std::cos(s);
      dir.b(q, k) = std::sin(s);
    }
  auto ld = lift_direction(model, *e.lifted, project_admissible(dir, {1.0, 0.0}, mesh));
  std::vector<double> r0, r1, r2, rt1, rt2;
  const Vec& lam = model.basis.lambda;
  const int count = std::min(samples, e.ens.size());
  for (int s = 0; s < count; ++s) {
    const ForwardTrajectory& tr = e.ens.paths[s];
    LinearizedTrajectory lin = linearized_solve(model, tr, ld);
    const Mat& padj = adj.paths[s].p;
    for (int k = 0; k < steps; ++k) {
      double nrm = e.controls.surrogate_norm_at(k, mesh), n2 = nrm * nrm;
      Vec c = tr.c.col(k);
      double uv = c.cwiseProduct(lam).dot(c);
      double d0 = 1.0 + n2;
      double d1 = visc * (2.0 * n2 + uv + 1.0);
      double d2 = visc * (1.0 + uv + n2);
      auto rate = [&](double a, double b) { return (std::log1p(b) - std::log1p(a)) / dt; };
      r0.push_back(rate(c.squaredNorm(), tr.c.col(k + 1).squaredNorm()) / d0);
      Vec z0 = lin.zeta.col(k), z1 = lin.zeta.col(k + 1);
      r1.push_back(rate(z0.squaredNorm(), z1.squaredNorm()) / d1);
      rt1.push_back(rate(z0.cwiseProduct(lam).dot(z0), z1.cwiseProduct(lam).dot(z1)) / d1);
      Vec p1 = padj.col(k + 1), p0 = padj.col(k);
      r2.push_back(rate(p1.squaredNorm(), p0.squaredNorm()) / d2);
      rt2.push_back(rate(p1.cwiseProduct(lam).dot(p1), p0.cwiseProduct(lam).dot(p0)) / d2);
    }
  }
  const double floor = 1e-12;
  WeightConstants w;
  w.c0 = std::max(floor, growth_fit(r0));
  w.c1 = std::max(floor, growth_fit(r1));
  w.c2 = std::max(floor, growth_fit(r2));
  w.ct1 = std::max(floor, growth_fit(rt1));
  w.ct2 = std::max(floor, growth_fit(rt2));
  return w;
}

double admissible_norm_bound(const Model& model, const AdmissibleSet& set) {
  const auto& ops = *model.ops;
  double bound = set.b_inf * std::sqrt(ops.mesh.perimeter) * (2.0 + 1.0 / ops.h_min());
  return set.b_h > 0.0 ? std::min(set.b_h, bound) : bound;
}

ConstantsLedger constants_report(const Model& model, const AdmissibleSet& set, const WeightConstants& fitted,
                                 double c_hat, double k_lip) {
  ConstantsLedger l;
  l.fitted = fitted;
  l.c_hat = c_hat;
  l.nu = model.spec.nu;
  l.bound_l = model.noise.m > 0 ? model.noise.bound_l : 0.0;
  l.k_lip = k_lip;
  l.horizon = model.time.horizon;
  l.n_sup = admissible_norm_bound(model, set);
  l.r_star = 2.0 * fitted.c0 * (1.0 + l.n_sup * l.n_sup);
  l.surrogate = {"c0", "c1", "c2", "ct1", "ct2", "c_hat", "n_sup", "r_star"};
  if (!(l.bound_l > 0.0)) {
    l.verdict_cf = l.verdict_ca1 = l.verdict_cnd1 = "SKIPPED";
    return l;
  }
  const double nu = l.nu, L = l.bound_l, T = l.horizon, r = l.r_star;
  l.lambda_star0 = nu / L;
  l.lambda_star_t = nu * std::exp(-r * T) / L;
  l.a_star = nu * nu * std::exp(-2.0 * r * T) / (2.0 * L);
  l.beta_star0 = nu / (8.0 * L);
  l.beta_star_t = nu * std::exp(-4.0 * (r + L) * T) / (8.0 * L);
  l.b_star = nu * nu * std::exp(-8.0 * (r + L) * T) / (8.0 * L);
  const double inv2 = std::max(1.0 / (nu * nu), 1.0), inv1 = std::max(1.0 / nu, 1.0);
  const double left = std::min({l.a_star, l.b_star, l.b_star / c_hat});
  auto verdict = [](double lhs, double rhs) { return lhs >= rhs ? std::string("PASS") : std::string("FAIL"); };
  l.lhs_cf = left;
  l.rhs_cf = 24.0 * std::max({fitted.c1, fitted.c2, fitted.ct1, fitted.ct2}) * inv2;
  l.lhs_ca1 = l.a_star;
  l.rhs_ca1 = 32.0 * std::max(fitted.c1, fitted.c2) * inv1;
  l.lhs_cnd1 = left;
  l.rhs_cnd1 = 24.0 * std::max(fitted.ct1, fitted.ct2) * inv2;
  l.verdict_cf = verdict(l.lhs_cf, l.rhs_cf);
  l.verdict_ca1 = verdict(l.lhs_ca1, l.rhs_ca1);
  l.verdict_cnd1 = verdict(l.lhs_cnd1, l.rhs_cnd1);
  return l;
}

IntegrabilityConstants integrability_constants(const ConstantsLedger& l) {
  IntegrabilityConstants k;
  k.nu = l.nu;
  k.bound_l = l.bound_l;
  k.r_star = l.r_star;
  k.a_star = l.a_star;
  k.b_star = l.b_star;
  k.c_hat = l.c_hat;
  k.horizon = l.horizon;
  return k;
}

}  // namespace nsslip
