#include "nsslip/adjoint.hpp"

#include <cmath>

namespace nsslip {

Target zero_target(const Model& model) {
  const int nt = model.time.steps + 1;
  return {{Mat::Zero(model.n(), nt)}, Mat::Zero(model.ops->n_full, nt)};
}

Target field_target(const Model& model, const Mat& field) {
  if (field.rows() != model.ops->n_full || field.cols() != model.time.steps + 1)
    throw std::invalid_argument("target field does not match the grid");
  return {{Mat::Zero(model.n(), field.cols())}, field};
}

Target ensemble_target(const Model& model, const Ensemble& ens) {
  if (ens.size() == 0) throw std::invalid_argument("recorded ensemble is empty");
  Target t;
  for (const auto& tr : ens.paths) t.cd.push_back(tr.c);
  t.fd = ens.paths[0].lifted->field;
  if (t.fd.rows() != model.ops->n_full) throw std::invalid_argument("recorded ensemble does not match the grid");
  return t;
}

TrackingData make_tracking(const Model& model, const LiftedControls& lifted, const Target& target) {
  if (target.fd.cols() != lifted.field.cols()) throw std::invalid_argument("target and controls disagree on the time grid");
  TrackingData td;
  Mat r = lifted.field - target.fd;
  Mat mr = model.ops->mass.asDiagonal() * r;
  td.rproj = model.basis.e.transpose() * mr;
  td.lmr = model.lift.matrix.transpose() * mr;
  td.rnorm2 = (r.cwiseProduct(mr)).colwise().sum().transpose();
  return td;
}

Vec tracking_source(const ForwardTrajectory& tr, const TrackingData& td, const Target& target, int sample, int k) {
  return tr.c.col(k) - target.coeff(sample).col(k) + td.rproj.col(k);
}

double tracking_cost(const Model& model, const ForwardTrajectory& tr, const TrackingData& td, const Target& target,
                     int sample) {
  const Mat& cd = target.coeff(sample);
  CompensatedSum sum;
  for (int k = 0; k <= model.time.steps; ++k) {
    Vec d = tr.c.col(k) - cd.col(k);
    double v = d.squaredNorm() + 2.0 * d.dot(td.rproj.col(k)) + td.rnorm2[k];
    sum.add(0.5 * model.time.weight(k) * model.time.dt * v);
  }
  return sum.value();
}

std::string to_string(AdjointSolver s) { return s == AdjointSolver::Pathwise ? "PATHWISE" : "REGRESSION"; }

AdjointSolver adjoint_solver_from_string(const std::string& s) {
  if (s == "PATHWISE" || s == "DETERMINISTIC") return AdjointSolver::Pathwise;
  if (s == "REGRESSION") return AdjointSolver::Regression;
  throw ConfigError("unknown adjoint solver '" + s + "'");
}

std::string to_string(FeatureMap f) { return f == FeatureMap::Linear ? "LINEAR" : "QUADRATIC"; }

FeatureMap feature_map_from_string(const std::string& s) {
  if (s == "LINEAR") return FeatureMap::Linear;
  if (s == "QUADRATIC") return FeatureMap::Quadratic;
  throw ConfigError("unknown regression feature map '" + s + "'");
}

namespace {

Vec jacobian_t(const Model& model, const LiftedControls& lc, int k, const Vec& c, const Vec& s) {
  if (!model.spec.convection) return Vec::Zero(s.size());
  return tensor_jacobian_t(model.tensors, c, s) + lc.coupling[k].transpose() * s;
}

AdjointPair make_pair(const Model& model) {
  const int n = model.n(), steps = model.time.steps;
  AdjointPair a;
  a.p = Mat::Zero(n, steps + 1);
  a.s = Mat::Zero(n, steps);
  a.eta = Mat::Zero(n, steps);
  return a;
}

}  // namespace

AdjointPair adjoint_solve_deterministic(const Model& model, const ForwardTrajectory& tr, const TrackingData& td,
                                        const Target& target, int sample) {
  const int steps = model.time.steps;
  const double dt = model.time.dt;
  if (tr.c.cols() != steps + 1 || td.rproj.cols() != steps + 1)
    throw std::invalid_argument("adjoint: trajectory does not match the time grid");
  const LiftedControls& lc = *tr.lifted;
  AdjointPair a = make_pair(model);
  a.tag = model.noise.m == 0 ? "DETERMINISTIC" : "PATHWISE";
  Vec lambda = model.time.weight(steps) * dt * tracking_source(tr, td, target, sample, steps);
  for (int k = steps - 1; k >= 0; --k) {
    Vec ck = tr.c.col(k);
    Vec s = model.implicit.cwiseProduct(lambda);
    Vec eta = noise_adjoint_increment(model.noise, ck + lc.proj.col(k), s, tr.path.dw.col(k));
    Vec p = s - dt * jacobian_t(model, lc, k, ck, s) + eta;
    a.s.col(k) = s;
    a.eta.col(k) = eta;
    a.p.col(k) = p;
    lambda = p + model.time.weight(k) * dt * tracking_source(tr, td, target, sample, k);
  }
  a.lambda0 = lambda;
  return a;
}

namespace {

// Least squares on centered, standardized features with an unpenalized intercept.
class Regressor {
 public:
  Regressor(const Mat& x, double ridge) : mean_(x.colwise().mean()) {
    const auto rows = x.rows();
    Mat xc = x.rowwise() - mean_.transpose();
    Vec scale(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      double sd = std::sqrt(xc.col(j).squaredNorm() / rows);
      double ref = 1e-10 * (1.0 + std::abs(mean_[j]));
      scale[j] = sd > ref ? sd : 0.0;
    }
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (scale[j] > 0) keep_.push_back(static_cast<int>(j));
    z_.resize(rows, keep_.size());
    for (size_t c = 0; c < keep_.size(); ++c) z_.col(c) = xc.col(keep_[c]) / scale[keep_[c]];
    if (keep_.empty()) return;
    Mat g = z_.transpose() * z_ / static_cast<double>(rows);
    g.diagonal().array() += ridge;
    solver_ = std::make_shared<Eigen::CompleteOrthogonalDecomposition<Mat>>(g);
  }

  // Fitted values at every sample.
  Mat fit(const Mat& y) const {
    const auto rows = y.rows();
    Vec ym = y.colwise().mean();
    Mat out = Mat::Zero(rows, y.cols());
    out.rowwise() += ym.transpose();
    if (keep_.empty()) return out;
    Mat yc = y.rowwise() - ym.transpose();
    Mat beta = solver_->solve(z_.transpose() * yc / static_cast<double>(rows));
    return out + z_ * beta;
  }

  int used() const { return static_cast<int>(keep_.size()); }

 private:
  Vec mean_;
  std::vector<int> keep_;
  Mat z_;
  std::shared_ptr<Eigen::CompleteOrthogonalDecomposition<Mat>> solver_;
};

Mat feature_matrix(const Model& model, const Ensemble& ens, const Target& target, const RegressionSpec& spec, int k) {
  const int n = model.n(), m = ens.size();
  const bool with_target = target.per_sample();
  std::vector<std::pair<int, int>> pairs;
  if (spec.features == FeatureMap::Quadratic)
    for (int i = 0; i < n && static_cast<int>(pairs.size()) < spec.quadratic_cap; ++i)
      for (int j = i; j < n && static_cast<int>(pairs.size()) < spec.quadratic_cap; ++j) pairs.emplace_back(i, j);
  const int f = n + (with_target ? n : 0) + static_cast<int>(pairs.size());
  Mat x(m, f);
  for (int s = 0; s < m; ++s) {
    Vec y = ens.paths[s].projected(k);
    x.row(s).head(n) = y.transpose();
    int col = n;
    if (with_target) {
      x.row(s).segment(col, n) = target.coeff(s).col(k).transpose();
      col += n;
    }
    for (auto [i, j] : pairs) x(s, col++) = y[i] * y[j];
  }
  return x;
}

}  // namespace

AdjointEnsemble adjoint_solve_regression(const Model& model, const Ensemble& ens, const TrackingData& td,
                                         const Target& target, const RegressionSpec& spec, int threads) {
  const int n = model.n(), steps = model.time.steps, mch = model.noise.m, samples = ens.size();
  const double dt = model.time.dt;
  if (samples == 0) throw std::invalid_argument("adjoint regression needs a nonempty ensemble");
  if (spec.ridge < 0) throw std::invalid_argument("ridge parameter must be nonnegative");
  const int nfeat = static_cast<int>(feature_matrix(model, ens, target, spec, 0).cols());
  if (samples < 4 * nfeat)
    throw std::invalid_argument("regression needs at least 4 samples per feature (" + std::to_string(nfeat) +
                                " features, " + std::to_string(samples) + " samples)");
  for (const auto& tr : ens.paths)
    if (tr.c.cols() != steps + 1) throw std::invalid_argument("adjoint: trajectory does not match the time grid");

  AdjointEnsemble out;
  out.solver = AdjointSolver::Regression;
  out.features = nfeat;
  out.martingale_residual = Vec::Zero(steps);
  out.paths.assign(samples, make_pair(model));
  for (auto& a : out.paths) {
    a.tag = "REGRESSION";
    a.q = Mat::Zero(n * mch, steps);
  }

  Mat lambda(samples, n);
  for (int s = 0; s < samples; ++s)
    lambda.row(s) = (model.time.weight(steps) * dt * tracking_source(ens.paths[s], td, target, s, steps)).transpose();

  for (int k = steps - 1; k >= 0; --k) {
    Mat y(samples, n * (1 + mch));
    parallel_for(samples, threads, [&](int s) {
      Vec sl = model.implicit.cwiseProduct(lambda.row(s).transpose());
      y.row(s).head(n) = sl.transpose();
      for (int j = 0; j < mch; ++j) y.row(s).segment(n * (1 + j), n) = sl.transpose() * (ens.paths[s].path.dw(j, k) / dt);
    });
    Regressor reg(feature_matrix(model, ens, target, spec, k), spec.ridge);
    Mat fitted = reg.fit(y);
    if (!fitted.allFinite()) throw std::runtime_error("adjoint regression produced non-finite values at step " + std::to_string(k));

    std::vector<Vec> resid(samples);
    parallel_for(samples, threads, [&](int s) {
      const ForwardTrajectory& tr = ens.paths[s];
      AdjointPair& a = out.paths[s];
      Vec ck = tr.c.col(k), yk = tr.projected(k);
      Vec sfit = fitted.row(s).head(n).transpose();
      Mat q(n, mch);
      Vec mart = y.row(s).head(n).transpose() - sfit;
      for (int j = 0; j < mch; ++j) {
        q.col(j) = fitted.row(s).segment(n * (1 + j), n).transpose();
        a.q.col(k).segment(j * n, n) = q.col(j);
        mart -= q.col(j) * tr.path.dw(j, k);
      }
      resid[s] = mart;
      Vec eta = mch > 0 ? Vec(dt * apply_G_jacobian_adjoint(model.noise, 0.0, yk, q)) : Vec::Zero(n);
      Vec p = sfit - dt * jacobian_t(model, *tr.lifted, k, ck, sfit) + eta;
      a.s.col(k) = sfit;
      a.eta.col(k) = eta;
      a.p.col(k) = p;
      lambda.row(s) = (p + model.time.weight(k) * dt * tracking_source(tr, td, target, s, k)).transpose();
    });
    std::vector<const Mat*> ptrs;
    std::vector<Mat> rm(samples);
    for (int s = 0; s < samples; ++s) {
      rm[s] = resid[s];
      ptrs.push_back(&rm[s]);
    }
    out.martingale_residual[k] = compensated_mean(ptrs).norm();
  }
  for (int s = 0; s < samples; ++s) out.paths[s].lambda0 = lambda.row(s).transpose();
  return out;
}

AdjointEnsemble adjoint_solve(const Model& model, const Ensemble& ens, const TrackingData& td, const Target& target,
                              AdjointSolver solver, const RegressionSpec& spec, int threads) {
  if (solver == AdjointSolver::Regression) return adjoint_solve_regression(model, ens, td, target, spec, threads);
  AdjointEnsemble out;
  out.solver = AdjointSolver::Pathwise;
  out.paths.resize(ens.size());
  out.martingale_residual = Vec::Zero(model.time.steps);
  parallel_for(ens.size(), threads,
               [&](int s) { out.paths[s] = adjoint_solve_deterministic(model, ens.paths[s], td, target, s); });
  return out;
}

Mat boundary_sensitivity(const Model& model, const LiftedControls& lifted, const TrackingData& td, const Target& target,
                         const Ensemble& ens, const AdjointEnsemble& adj, const std::vector<int>& samples) {
  const int n = model.n(), steps = model.time.steps, nt = steps + 1;
  const double dt = model.time.dt;
  if (samples.empty()) throw std::invalid_argument("boundary_sensitivity needs at least one sample");
  const double inv = 1.0 / static_cast<double>(samples.size());

  // Sample means of everything the transpose needs, accumulated in sample order.
  Mat coeff_load = Mat::Zero(n, nt);  // multiplies L^T M E
  Mat sbar = Mat::Zero(n, steps);
  std::vector<Mat> outer(steps, Mat::Zero(n, n));
  for (int s : samples) {
    const ForwardTrajectory& tr = ens.paths[s];
    const AdjointPair& a = adj.paths[s];
    const Mat& cd = target.coeff(s);
    for (int k = 0; k < nt; ++k) {
      Vec v = model.time.weight(k) * dt * (tr.c.col(k) - cd.col(k));
      if (k < steps) v += a.s.col(k) + a.eta.col(k);
      if (k >= 1) v -= a.s.col(k - 1);
      if (k == 0) v -= a.lambda0;
      coeff_load.col(k) += v * inv;
    }
    if (model.spec.convection) {
      sbar += a.s * inv;
      for (int k = 0; k < steps; ++k) outer[k].noalias() += (a.s.col(k) * tr.c.col(k).transpose()) * inv;
    }
  }

  Mat theta = model.lme * coeff_load;
  for (int k = 0; k < nt; ++k) theta.col(k) += model.time.weight(k) * dt * td.lmr.col(k);
  if (!model.spec.convection) return theta;

  Mat full = Mat::Zero(model.ops->n_full, steps);
  for (int k = 0; k < steps; ++k) {
    Mat& o = outer[k];
    theta.col(k) -= dt * (model.tensors.gamma_l * Eigen::Map<const Vec>(o.data(), n * n));
    if (lifted.field.col(k).cwiseAbs().maxCoeff() == 0.0) continue;
    Trilinear::Points pa = model.tri->eval(lifted.field.col(k));
    Trilinear::Points ps = model.tri->eval(model.basis.e * sbar.col(k));
    full.col(k) = model.tri->grad_w(pa, ps) + model.tri->grad_z(pa, ps);
  }
  theta.leftCols(steps) -= dt * (model.lift.matrix.transpose() * full);
  return theta;
}

PressureSolver::PressureSolver(const DiscreteOperators& ops) : ops_(ops) {
  const int nc = ops.grid.num_cells();
  w_ = Vec::Zero(ops.n_full);
  for (int col = 0; col < ops.grad.outerSize(); ++col)
    for (SpMat::InnerIterator it(ops.grad, col); it; ++it) w_[it.row()] = ops.mass[it.row()];
  grad_ = ops.grad;
  SpMat a = SpMat(grad_.transpose() * w_.asDiagonal() * grad_);
  // Pin cell 0; the mean is removed afterwards.
  Triplets t;
  for (int col = 0; col < a.outerSize(); ++col)
    for (SpMat::InnerIterator it(a, col); it; ++it)
      if (it.row() != 0 && it.col() != 0) t.emplace_back(it.row(), it.col(), it.value());
  t.emplace_back(0, 0, 1.0);
  SpMat pinned(nc, nc);
  pinned.setFromTriplets(t.begin(), t.end());
  ldlt_ = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(pinned);
  if (ldlt_->info() != Eigen::Success) throw std::runtime_error("pressure Poisson factorization failed");
}

Vec PressureSolver::solve(const Vec& r) const {
  Vec rhs = grad_.transpose() * w_.cwiseProduct(r);
  rhs[0] = 0.0;
  Vec pi = ldlt_->solve(rhs);
  return pi.array() - pi.mean();
}

Vec PressureSolver::divergence_defect(const Vec& r, const Vec& pi) const {
  return grad_.transpose() * w_.cwiseProduct(r - grad_ * pi);
}

Vec adjoint_strong_residual(const Model& model, const Vec& p_field, const Vec& y_field, const Vec& u_field,
                            const Vec& noise_coeff) {
  const DiscreteOperators& ops = *model.ops;
  Vec weak = -model.spec.nu * (ops.vgram * p_field) + ops.mass.cwiseProduct(u_field);
  if (model.spec.convection) {
    Trilinear::Points py = model.tri->eval(y_field), pp = model.tri->eval(p_field);
    weak -= model.tri->grad_w(py, pp) + model.tri->grad_z(py, pp);
  }
  if (noise_coeff.size() > 0) weak += ops.mass.cwiseProduct(model.basis.e * noise_coeff);
  Vec r = Vec::Zero(ops.n_full);
  for (int d = 0; d < ops.n_full; ++d)
    if (ops.mass[d] > 0) r[d] = weak[d] / ops.mass[d];
  return r;
}

Vec recover_pressure(const Model& model, const PressureSolver& solver, const Vec& p_field, const Vec& y_field,
                     const Vec& u_field, const Vec& noise_coeff) {
  return solver.solve(adjoint_strong_residual(model, p_field, y_field, u_field, noise_coeff));
}

Vec normal_stress_at_nodes(const DiscreteOperators& ops, const Vec& f) {
  const Grid& g = ops.grid;
  const BoundaryMesh& mesh = ops.mesh;
  const int nx = g.nx, ny = g.ny;
  Vec out = Vec::Zero(ops.n_nodes);
  auto u = [&](int i, int j) { return f[g.xface(i, j)]; };
  auto v = [&](int i, int j) { return f[g.yface(i, j)]; };
  for (int k = 0; k < ops.n_nodes; ++k) {
    if (mesh.corner[k]) continue;
    int i = mesh.vi[k], j = mesh.vj[k];
    double d = 0.0;
    switch (mesh.edge[k]) {
      case Edge::Bottom: d = 0.5 * ((v(i - 1, 1) - v(i - 1, 0)) + (v(i, 1) - v(i, 0))) / g.hy; break;
      case Edge::Top: d = 0.5 * ((v(i - 1, ny) - v(i - 1, ny - 1)) + (v(i, ny) - v(i, ny - 1))) / g.hy; break;
      case Edge::Left: d = 0.5 * ((u(1, j - 1) - u(0, j - 1)) + (u(1, j) - u(0, j))) / g.hx; break;
      case Edge::Right: d = 0.5 * ((u(nx, j - 1) - u(nx - 1, j - 1)) + (u(nx, j) - u(nx - 1, j))) / g.hx; break;
    }
    out[k] = 2.0 * ops.nu * d;
  }
  const int p = ops.n_nodes;
  for (int k = 0; k < p; ++k)
    if (mesh.corner[k]) out[k] = 0.5 * (out[(k + p - 1) % p] + out[(k + 1) % p]);
  return out;
}

namespace {

Vec pressure_trace(const DiscreteOperators& ops, const Vec& pi) {
  const Grid& g = ops.grid;
  const BoundaryMesh& mesh = ops.mesh;
  const int nx = g.nx, ny = g.ny, p = ops.n_nodes;
  Vec out = Vec::Zero(p);
  auto cell = [&](int i, int j) { return pi[g.cell(i, j)]; };
  auto extrap = [](double a, double b) { return 1.5 * a - 0.5 * b; };
  for (int k = 0; k < p; ++k) {
    if (mesh.corner[k]) continue;
    int i = mesh.vi[k], j = mesh.vj[k];
    switch (mesh.edge[k]) {
      case Edge::Bottom: out[k] = 0.5 * (extrap(cell(i - 1, 0), cell(i - 1, 1)) + extrap(cell(i, 0), cell(i, 1))); break;
      case Edge::Top:
        out[k] = 0.5 * (extrap(cell(i - 1, ny - 1), cell(i - 1, ny - 2)) + extrap(cell(i, ny - 1), cell(i, ny - 2)));
        break;
      case Edge::Left: out[k] = 0.5 * (extrap(cell(0, j - 1), cell(1, j - 1)) + extrap(cell(0, j), cell(1, j))); break;
      case Edge::Right:
        out[k] = 0.5 * (extrap(cell(nx - 1, j - 1), cell(nx - 2, j - 1)) + extrap(cell(nx - 1, j), cell(nx - 2, j)));
        break;
    }
  }
  for (int k = 0; k < p; ++k)
    if (mesh.corner[k]) out[k] = 0.5 * (out[(k + p - 1) % p] + out[(k + 1) % p]);
  return out;
}

}  // namespace

AdjointBoundaryData boundary_terms(const Model& model, const AdjointPair& adj, const ForwardTrajectory& tr,
                                   const Target& target, const TrackingData&, int sample) {
  const DiscreteOperators& ops = *model.ops;
  const int nt = model.time.steps + 1, p = ops.n_nodes;
  PressureSolver solver(ops);
  AdjointBoundaryData out;
  out.pressure = Mat::Zero(p, nt);
  out.normal_stress = Mat::Zero(p, nt);
  out.tangential = Mat::Zero(p, nt);
  out.state_tangential = Mat::Zero(p, nt);
  const Mat& cd = target.coeff(sample);
  for (int k = 0; k < nt; ++k) {
    Vec pf = model.basis.e * adj.p.col(k);
    Vec yf = model.basis.e * tr.c.col(k) + tr.lifted->field.col(k);
    Vec uf = model.basis.e * (tr.c.col(k) - cd.col(k)) + (tr.lifted->field.col(k) - target.fd.col(k));
    Vec noise;
    if (adj.q.size() > 0 && k < nt - 1 && model.noise.m > 0) {
      Mat q(model.n(), model.noise.m);
      for (int j = 0; j < model.noise.m; ++j) q.col(j) = adj.q.col(k).segment(j * model.n(), model.n());
      noise = apply_G_jacobian_adjoint(model.noise, 0.0, tr.projected(k), q);
    }
    Vec pi = recover_pressure(model, solver, pf, yf, uf, noise);
    out.pressure.col(k) = pressure_trace(ops, pi);
    out.normal_stress.col(k) = normal_stress_at_nodes(ops, pf);
    out.tangential.col(k) = ops.tangential_trace * pf;
    out.state_tangential.col(k) = ops.tangential_trace * yf;
  }
  return out;
}

DualityReport duality_check(const Model& model, const Ensemble& ens, const std::vector<LinearizedTrajectory>& lin,
                            const AdjointEnsemble& adj, const TrackingData& td, const Target& target,
                            DualityMode mode) {
  const int samples = ens.size(), steps = model.time.steps;
  const double dt = model.time.dt;
  if (static_cast<int>(lin.size()) != samples || static_cast<int>(adj.paths.size()) != samples)
    throw std::invalid_argument("duality check: ensembles do not match");
  if (mode == DualityMode::PathwiseDet && (model.noise.m != 0 || adj.solver != AdjointSolver::Pathwise))
    throw std::invalid_argument("PATHWISE_DET duality needs ZERO noise and the deterministic adjoint");
  for (int s = 0; s < samples; ++s)
    if (lin[s].seed != ens.paths[s].path.seed) throw std::invalid_argument("duality check: seeds do not match");

  std::vector<double> lhs(samples), rhs(samples), diff(samples);
  for (int s = 0; s < samples; ++s) {
    const ForwardTrajectory& tr = ens.paths[s];
    const LinearizedTrajectory& z = lin[s];
    const LiftedDirection& ld = *z.direction;
    const AdjointPair& a = adj.paths[s];
    const Mat& cd = target.coeff(s);
    Mat phi = ld.direction.stacked_all();
    CompensatedSum l, r;
    for (int k = 0; k <= steps; ++k) {
      double w = model.time.weight(k) * dt;
      double common = w * (ld.proj.col(k).dot(tr.c.col(k) - cd.col(k)) + phi.col(k).dot(td.lmr.col(k)));
      l.add(w * z.zeta.col(k).dot(tracking_source(tr, td, target, s, k)));
      l.add(common);
      r.add(common);
      if (k < steps) {
        r.add((a.s.col(k) + a.eta.col(k)).dot(ld.proj.col(k)));
        r.add(-dt * a.s.col(k).dot(z.load.col(k)));
      }
      if (k >= 1) r.add(-a.s.col(k - 1).dot(ld.proj.col(k)));
      if (k == 0) r.add(-a.lambda0.dot(ld.proj.col(0)));
    }
    lhs[s] = l.value();
    rhs[s] = r.value();
    diff[s] = lhs[s] - rhs[s];
  }
  MeanStats ml = mean_stats(lhs), mr = mean_stats(rhs), md = mean_stats(diff);
  DualityReport rep;
  rep.mode = mode;
  rep.samples = samples;
  rep.lhs = ml.mean;
  rep.rhs = mr.mean;
  rep.defect = md.mean;
  rep.stderr_ = md.stderr_;
  double scale = std::max({std::abs(ml.mean), std::abs(mr.mean), 1e-300});
  rep.relative = std::abs(md.mean) / scale;
  return rep;
}

}  // namespace nsslip
