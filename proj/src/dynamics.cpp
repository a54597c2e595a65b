#include "nsslip/dynamics.hpp"

#include <cmath>
#include <random>

namespace nsslip {

TimeGrid make_time_grid(double horizon, int steps) {
  if (!(horizon > 0.0)) throw std::invalid_argument("time horizon must be positive");
  if (steps < 16) throw std::invalid_argument("at least 16 time steps are required");
  TimeGrid g;
  g.horizon = horizon;
  g.steps = steps;
  g.dt = horizon / steps;
  return g;
}

std::uint64_t derived_seed(std::uint64_t base, int sample) {
  return base ^ static_cast<std::uint64_t>(sample);
}

BrownianPath sample_brownian(std::uint64_t seed, int m, const TimeGrid& grid) {
  if (m < 0) throw std::invalid_argument("channel count must be nonnegative");
  BrownianPath path;
  path.seed = seed;
  path.dw.resize(m, grid.steps);
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> normal(0.0, std::sqrt(grid.dt));
  for (int k = 0; k < grid.steps; ++k)
    for (int j = 0; j < m; ++j) path.dw(j, k) = normal(rng);
  return path;
}

std::shared_ptr<const Model> build_model(const ModelSpec& spec) {
  auto model = std::make_shared<Model>();
  model->spec = spec;
  Geometry geo = build_geometry(spec.domain);
  model->ops = std::make_shared<const DiscreteOperators>(assemble_operators(geo.grid, geo.mesh, spec.alpha, spec.nu));
  model->basis = stokes_eigenbasis(*model->ops, spec.n);
  model->lifting = std::make_shared<const LiftingSolver>(model->ops);
  model->lift = build_lifting_map(*model->lifting);
  model->tri = std::make_shared<const Trilinear>(*model->ops);
  if (spec.convection) model->tensors = build_convection_tensors(*model->tri, model->basis, model->lift);
  model->tensors.n = spec.n;
  model->time = make_time_grid(spec.horizon, spec.steps);
  model->noise = make_noise_model(spec.noise, spec.n);
  model->implicit = (1.0 + spec.nu * model->time.dt * model->basis.lambda.array()).inverse().matrix();
  model->lme = model->lift.matrix.transpose() * model->basis.me.transpose();
  model->basis_tangent = model->ops->tangential_trace * model->basis.e;
  return model;
}

std::shared_ptr<const LiftedControls> lift_controls(const Model& model, const ControlPair& controls) {
  const int nt = model.time.steps + 1, n = model.n();
  if (controls.time_nodes() != nt || controls.nodes() != model.nodes())
    throw std::invalid_argument("controls do not match the boundary mesh and time grid");
  auto out = std::make_shared<LiftedControls>();
  Mat theta = controls.stacked_all();
  out->field = model.lift.matrix * theta;
  out->proj = model.basis.me * out->field;
  out->normal = model.ops->normal_trace * out->field;
  out->self = Mat::Zero(n, nt);
  out->coupling.assign(nt, Mat::Zero(n, n));
  out->coupling_adv.assign(nt, Mat::Zero(n, n));
  if (!model.spec.convection) return out;
  Mat cs = model.tensors.csum * theta, c2 = model.tensors.c2 * theta;
  for (int k = 0; k < nt; ++k) {
    out->coupling[k] = unstack(cs.col(k), n);
    out->coupling_adv[k] = unstack(c2.col(k), n);
    if (theta.col(k).cwiseAbs().maxCoeff() == 0.0) continue;
    Trilinear::Points pa = model.tri->eval(out->field.col(k));
    out->self.col(k) = model.basis.e.transpose() * model.tri->residual(pa, pa);
  }
  return out;
}

Vec convection_term(const Model& model, const LiftedControls& lifted, int k, const Vec& c) {
  if (!model.spec.convection) return Vec::Zero(c.size());
  return tensor_quadratic(model.tensors, c) + lifted.coupling[k] * c + lifted.self.col(k);
}

ForwardTrajectory forward_solve(const Model& model, const Vec& y0, std::shared_ptr<const LiftedControls> lifted,
                                const BrownianPath& path, int sample) {
  const int steps = model.time.steps, n = model.n();
  const double dt = model.time.dt, nu = model.spec.nu;
  if (y0.size() != n) throw std::invalid_argument("initial state must be given in basis coordinates");
  if (!y0.allFinite()) throw std::invalid_argument("initial state is not finite");
  if (path.dw.cols() != steps || path.channels() != model.noise.m)
    throw std::invalid_argument("Brownian path does not match the time grid or channel count");

  ForwardTrajectory tr;
  tr.path = path;
  tr.lifted = lifted;
  tr.c.resize(n, steps + 1);
  EnergyLedger& el = tr.ledger;
  for (Vec* v : {&el.dissipation, &el.numerical, &el.lifting_work, &el.noise_work, &el.convection_increment,
                 &el.coupling, &el.boundary_work, &el.defect})
    v->setZero(steps);

  const LiftedControls& lc = *lifted;
  tr.c.col(0) = y0 - lc.proj.col(0);
  for (int k = 0; k < steps; ++k) {
    Vec ck = tr.c.col(k);
    Vec nk = convection_term(model, lc, k, ck);
    Vec xi = noise_increment(model.noise, ck + lc.proj.col(k), path.dw.col(k));
    Vec dproj = lc.proj.col(k + 1) - lc.proj.col(k);
    Vec next = model.implicit.cwiseProduct(ck - dproj - dt * nk + xi);
    if (!(next.norm() <= model.spec.ceiling))
      throw BlowUpError("state norm exceeded the ceiling at step " + std::to_string(k + 1) + " of sample " +
                            std::to_string(sample),
                        sample, k + 1);
    tr.c.col(k + 1) = next;

    Vec dc = next - ck;
    el.dissipation[k] = -2.0 * nu * dt * next.cwiseProduct(model.basis.lambda).dot(next);
    el.numerical[k] = -dc.squaredNorm();
    el.lifting_work[k] = -2.0 * next.dot(dproj);
    el.noise_work[k] = 2.0 * next.dot(xi);
    el.convection_increment[k] = -2.0 * dt * dc.dot(nk);
    if (model.spec.convection)
      el.coupling[k] = -2.0 * dt * ck.dot((lc.coupling[k] - lc.coupling_adv[k]) * ck + lc.self.col(k));
    Vec tt = model.basis_tangent * ck;
    double bw = 0.0;
    if (model.spec.convection)
      for (int q = 0; q < model.nodes(); ++q)
        if (!model.ops->mesh.corner[q]) bw += model.ops->mesh.weight[q] * lc.normal(q, k) * tt[q] * tt[q];
    el.boundary_work[k] = -dt * bw;
    double change = dc.dot(next + ck);
    el.defect[k] = change - (el.dissipation[k] + el.numerical[k] + el.lifting_work[k] + el.noise_work[k] +
                             el.convection_increment[k] + el.coupling[k]);
  }
  return tr;
}

Ensemble forward_ensemble(const Model& model, const Vec& y0, std::shared_ptr<const LiftedControls> lifted,
                          std::uint64_t base_seed, int samples, int threads) {
  Ensemble ens;
  ens.seed = base_seed;
  ens.paths.resize(samples);
  parallel_for(samples, threads, [&](int m) {
    BrownianPath path = sample_brownian(derived_seed(base_seed, m), model.noise.m, model.time);
    ens.paths[m] = forward_solve(model, y0, lifted, path, m);
  });
  return ens;
}

std::shared_ptr<const LiftedDirection> lift_direction(const Model& model, const LiftedControls& base,
                                                      const ControlPair& direction) {
  const int nt = model.time.steps + 1, n = model.n();
  if (direction.time_nodes() != nt || direction.nodes() != model.nodes())
    throw std::invalid_argument("direction does not match the boundary mesh and time grid");
  auto out = std::make_shared<LiftedDirection>();
  out->direction = direction;
  Mat theta = direction.stacked_all();
  out->field = model.lift.matrix * theta;
  out->proj = model.basis.me * out->field;
  out->cross = Mat::Zero(n, nt);
  out->coupling.assign(nt, Mat::Zero(n, n));
  if (!model.spec.convection) return out;
  Mat cs = model.tensors.csum * theta;
  for (int k = 0; k < nt; ++k) {
    out->coupling[k] = unstack(cs.col(k), n);
    if (theta.col(k).cwiseAbs().maxCoeff() == 0.0) continue;
    Trilinear::Points pf = model.tri->eval(out->field.col(k));
    Trilinear::Points pa = model.tri->eval(base.field.col(k));
    out->cross.col(k) = model.basis.e.transpose() * (model.tri->residual(pf, pa) + model.tri->residual(pa, pf));
  }
  return out;
}

LinearizedTrajectory linearized_solve(const Model& model, const ForwardTrajectory& state,
                                      std::shared_ptr<const LiftedDirection> direction) {
  const int steps = model.time.steps, n = model.n();
  const double dt = model.time.dt;
  if (state.c.cols() != steps + 1 || state.c.rows() != n || direction->field.cols() != steps + 1)
    throw std::invalid_argument("linearized solve: state and direction grids do not match the model");
  const LiftedControls& lc = *state.lifted;
  const LiftedDirection& ld = *direction;
  LinearizedTrajectory lt;
  lt.direction = direction;
  lt.seed = state.path.seed;
  lt.zeta.resize(n, steps + 1);
  lt.load = Mat::Zero(n, steps);
  lt.zeta.col(0) = -ld.proj.col(0);
  for (int k = 0; k < steps; ++k) {
    Vec ck = state.c.col(k), zk = lt.zeta.col(k);
    Vec drive = Vec::Zero(n);
    if (model.spec.convection) {
      lt.load.col(k) = ld.coupling[k] * ck + ld.cross.col(k);
      drive = tensor_jacobian(model.tensors, ck, zk) + lc.coupling[k] * zk + lt.load.col(k);
    }
    Vec noise = noise_jacobian_increment(model.noise, ck + lc.proj.col(k), zk + ld.proj.col(k), state.path.dw.col(k));
    Vec rhs = zk - (ld.proj.col(k + 1) - ld.proj.col(k)) - dt * drive + noise;
    lt.zeta.col(k + 1) = model.implicit.cwiseProduct(rhs);
  }
  return lt;
}

std::vector<GateauxRow> gateaux_check(const Model& model, const Vec& y0, const ControlPair& base,
                                      const ControlPair& direction, const std::vector<double>& eps, int samples,
                                      std::uint64_t seed, int threads) {
  for (size_t e = 1; e < eps.size(); ++e)
    if (!(eps[e] < eps[e - 1])) throw std::invalid_argument("epsilon list must be strictly decreasing");
  auto lifted = lift_controls(model, base);
  auto ldir = lift_direction(model, *lifted, direction);
  std::vector<std::shared_ptr<const LiftedControls>> perturbed;
  for (double e : eps) perturbed.push_back(lift_controls(model, base + direction * e));

  const double dt = model.time.dt;
  std::vector<std::vector<double>> vh(eps.size(), std::vector<double>(samples, 0.0));
  std::vector<std::vector<double>> vv = vh;
  std::vector<std::vector<char>> ok(eps.size(), std::vector<char>(samples, 1));
  parallel_for(samples, threads, [&](int m) {
    BrownianPath path = sample_brownian(derived_seed(seed, m), model.noise.m, model.time);
    ForwardTrajectory y = forward_solve(model, y0, lifted, path, m);
    LinearizedTrajectory z = linearized_solve(model, y, ldir);
    for (size_t e = 0; e < eps.size(); ++e) {
      try {
        ForwardTrajectory ye = forward_solve(model, y0, perturbed[e], path, m);
        double sh = 0.0, sv = 0.0;
        for (int k = 0; k <= model.time.steps; ++k) {
          Vec d = (ye.c.col(k) - y.c.col(k)) / eps[e] - z.zeta.col(k);
          double w = model.time.weight(k) * dt;
          sh += w * d.squaredNorm();
          sv += w * d.cwiseProduct(model.basis.lambda).dot(d);
        }
        vh[e][m] = sh;
        vv[e][m] = sv;
      } catch (const BlowUpError&) {
        ok[e][m] = 0;
      }
    }
  });
  std::vector<GateauxRow> rows;
  for (size_t e = 0; e < eps.size(); ++e) {
    std::vector<double> h, v;
    GateauxRow row;
    row.eps = eps[e];
    for (int m = 0; m < samples; ++m) {
      if (ok[e][m]) {
        h.push_back(vh[e][m]);
        v.push_back(vv[e][m]);
      } else {
        ++row.blowups;
      }
    }
    MeanStats sh = mean_stats(h), sv = mean_stats(v);
    row.mean_h = sh.mean;
    row.stderr_h = sh.stderr_;
    row.mean_v = sv.mean;
    row.stderr_v = sv.stderr_;
    rows.push_back(row);
  }
  return rows;
}

std::string to_string(WeightKind k) {
  switch (k) {
    case WeightKind::Xi0: return "XI0";
    case WeightKind::Xi1: return "XI1";
    case WeightKind::Xi2: return "XI2";
    case WeightKind::Beta: return "BETA";
  }
  return "XI0";
}

WeightProcess weight_path(WeightKind kind, const WeightConstants& k, const Model& model,
                          const ForwardTrajectory& tr, const ControlPair& controls) {
  const int steps = model.time.steps;
  const double dt = model.time.dt, visc = 1.0 / model.spec.nu + 1.0;
  WeightProcess w;
  w.kind = kind;
  switch (kind) {
    case WeightKind::Xi0: w.constant = k.c0; break;
    case WeightKind::Xi1: w.constant = k.c1; break;
    case WeightKind::Xi2: w.constant = k.c2; break;
    case WeightKind::Beta: w.constant = std::max(k.c1, k.c2); break;
  }
  w.xi.resize(steps + 1);
  w.xi[0] = 1.0;
  double integral = 0.0;
  for (int j = 0; j < steps; ++j) {
    double nrm = controls.surrogate_norm_at(j, model.ops->mesh);
    double n2 = nrm * nrm;
    Vec c = tr.c.col(j);
    double uv = c.cwiseProduct(model.basis.lambda).dot(c);
    double f1 = k.c1 * visc * (2.0 * n2 + uv + 1.0);
    double f2 = k.c2 * visc * (1.0 + uv + n2);
    double f = 0.0;
    switch (kind) {
      case WeightKind::Xi0: f = k.c0 * (1.0 + n2); break;
      case WeightKind::Xi1: f = f1; break;
      case WeightKind::Xi2: f = f2; break;
      case WeightKind::Beta: f = 2.0 * std::max(f1, f2); break;
    }
    integral += f * dt;
    w.xi[j + 1] = std::exp(-integral);
  }
  return w;
}

double IntegrabilityConstants::lambda_star(double t) const {
  return nu * std::exp(-r_star * t) / bound_l;
}

ExpMomentReport exp_integrability_stats(const Model& model, const std::vector<const ForwardTrajectory*>& trs,
                                        const IntegrabilityConstants& k) {
  if (trs.size() < 64) throw std::invalid_argument("exponential moment statistics need at least 64 samples");
  if (!(k.bound_l > 0.0)) throw std::invalid_argument("exponential moment statistics need L > 0");
  const int steps = model.time.steps;
  const double dt = model.time.dt, cap = 700.0;
  ExpMomentReport rep;
  rep.samples = static_cast<int>(trs.size());
  std::array<std::vector<double>, 4> values;
  for (const ForwardTrajectory* tr : trs) {
    std::array<double, 4> ex{0, 0, 0, 0};
    for (int q = 0; q <= steps; ++q) {
      Vec c = tr->c.col(q);
      double h2 = c.squaredNorm(), v2 = c.cwiseProduct(model.basis.lambda).dot(c);
      double t = model.time.time(q), w = model.time.weight(q) * dt;
      ex[0] = std::max(ex[0], k.lambda_star(t) * std::exp(-t * k.r_star) * h2);
      ex[1] += k.a_star * w * v2;
      ex[2] += k.b_star * w * h2 * v2;
      ex[3] += k.b_star / k.c_hat * w * h2 * h2;
    }
    for (int s = 0; s < 4; ++s) {
      rep.max_exponent[s] = std::max(rep.max_exponent[s], ex[s]);
      if (ex[s] > cap) rep.capped[s] = true;
      values[s].push_back(std::exp(std::min(ex[s], cap)));
    }
  }
  for (int s = 0; s < 4; ++s) {
    MeanStats st = mean_stats(values[s]);
    rep.mean[s] = st.mean;
    rep.stderr_[s] = st.stderr_;
    double total = st.mean * st.count, biggest = 0.0;
    for (double v : values[s]) biggest = std::max(biggest, v);
    rep.heavy_tail[s] = biggest > 0.5 * total;
  }
  return rep;
}

}  // namespace nsslip
