#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "nsslip/run.hpp"
#include "support.hpp"

using namespace nsslip;
using namespace nsslip::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string kv(const std::string& k, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s=%.3e ", k.c_str(), v);
  return buf;
}

ModelSpec desk_spec(bool noisy) {
  ModelSpec s;
  if (noisy) {
    s.noise.family = NoiseFamily::MultiplicativeDamped;
    s.noise.channels = 2;
    s.noise.bound_l = 1e-2;
  }
  return s;
}

std::shared_ptr<const Model> desk_model(bool noisy) {
  static std::map<bool, std::shared_ptr<const Model>> cache;
  auto& m = cache[noisy];
  if (!m) m = build_model(desk_spec(noisy));
  return m;
}

Vec desk_y0() {
  Vec y = Vec::Zero(16);
  y[0] = 0.5;
  y[3] = -0.3;
  return y;
}

ControlPair random_direction(const Model& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  ControlPair u = ControlPair::zeros(m.nodes(), m.time.steps + 1);
  for (int k = 0; k < u.time_nodes(); ++k) {
    for (int q = 0; q < u.nodes(); ++q) {
      u.a(q, k) = n01(rng);
      u.b(q, k) = n01(rng);
    }
    u.a.col(k) = enforce_compatibility(u.a.col(k), m.ops->mesh);
  }
  return u;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double gram_defect(const GalerkinBasis& b) { return (b.me * b.e - Mat::Identity(b.n, b.n)).cwiseAbs().maxCoeff(); }

Outcome eigenbasis() {
  double lam[2];
  for (int r = 0; r < 2; ++r) {
    DomainSpec d;
    d.nx = d.ny = 16 << r;
    Geometry g = build_geometry(d);
    DiscreteOperators ops = assemble_operators(g.grid, g.mesh, 0.0, 1.0);
    lam[r] = stokes_eigenbasis(ops, 1).lambda[0];
  }
  double exact = 2 * M_PI * M_PI;
  double rich = (4 * lam[1] - lam[0]) / 3;
  double rel = std::abs(rich / exact - 1);
  const Model& m = *desk_model(false);
  double gd = gram_defect(m.basis);
  double kd = (m.basis.e.transpose() * (m.ops->vgram * m.basis.e) - Mat(m.basis.lambda.asDiagonal())).cwiseAbs().maxCoeff() /
              m.basis.lambda.maxCoeff();
  return {rel <= 5e-3 && gd <= 1e-10 && kd <= 1e-10,
          kv("lambda1_extrapolated_rel_err", rel) + kv("mass_gram_defect", gd) + kv("stiffness_gram_defect", kd)};
}

Outcome lifting() {
  const Model& m = *desk_model(false);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01;
  double worst[3] = {0, 0, 0};
  for (int t = 0; t < 10; ++t) {
    Vec a(m.nodes()), b(m.nodes());
    for (int q = 0; q < m.nodes(); ++q) {
      a[q] = n01(rng);
      b[q] = n01(rng);
    }
    LiftingField f = m.lifting->solve(enforce_compatibility(a, m.ops->mesh), b);
    worst[0] = std::max(worst[0], f.stokes_residual);
    worst[1] = std::max(worst[1], f.normal_mismatch);
    worst[2] = std::max(worst[2], f.slip_mismatch);
  }
  return {std::max({worst[0], worst[1], worst[2]}) <= 1e-8,
          kv("stokes", worst[0]) + kv("normal_trace", worst[1]) + kv("slip_trace", worst[2])};
}

Outcome energy() {
  const Model& m = *desk_model(false);
  ControlPair u = shape(m, 0.4, 0.3, 1, 2);
  BrownianPath path = sample_brownian(1, 0, m.time);
  ControlPair ub{Mat::Zero(u.nodes(), u.time_nodes()), u.b};
  ForwardTrajectory t0 = forward_solve(m, desk_y0(), lift_controls(m, ub), path);
  ForwardTrajectory t1 = forward_solve(m, desk_y0(), lift_controls(m, u), path);
  double d0 = t0.ledger.defect.cwiseAbs().maxCoeff();
  double d1 = (t1.ledger.defect - t1.ledger.boundary_work).cwiseAbs().maxCoeff();
  double bw = t1.ledger.boundary_work.cwiseAbs().maxCoeff();
  return {d0 <= 1e-8 && d1 <= 1e-8, kv("defect_a_zero", d0) + kv("defect_minus_boundary_work", d1) + kv("max_boundary_work", bw)};
}

Outcome gateaux() {
  std::vector<double> eps{1e-1, 5e-2, 2.5e-2, 1.25e-2, 6e-3, 3e-3};
  const Model& det = *desk_model(false);
  ControlPair base = shape(det, 0.4, 0.3, 1, 2), dir = shape(det, 0.05, -0.05, 2, 1);
  auto rows = gateaux_check(det, desk_y0(), base, dir, eps, 1, 1, 1);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    double x = std::log(r.eps), y = std::log(r.mean_h);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = rows.size();
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const Model& sto = *desk_model(true);
  auto srows = gateaux_check(sto, desk_y0(), base, dir, eps, 256, 42, 1);
  bool mono = true;
  for (size_t i = 1; i < srows.size(); ++i) mono = mono && srows[i].mean_h < srows[i - 1].mean_h;
  double ratio = srows.back().mean_h / srows.front().mean_h;
  return {std::abs(slope - 2.0) <= 0.3 && mono && ratio <= 1e-3,
          kv("det_slope", slope) + "stoch_monotone=" + (mono ? "yes " : "no ") + kv("stoch_ratio", ratio)};
}

Outcome duality() {
  std::string detail;
  bool pass = true;
  auto pathwise = [&](const Model& m, const Vec& y0, double tol, const char* tag) {
    ControlPair u = shape(m, 0.4, 0.3, 1, 2), dir = shape(m, 0.2, -0.25, 2, 1);
    Target tg = smooth_target(m);
    auto lc = lift_controls(m, u);
    TrackingData td = make_tracking(m, *lc, tg);
    Ensemble ens = forward_ensemble(m, y0, lc, 11, 1, 1);
    AdjointEnsemble adj = adjoint_solve(m, ens, td, tg, AdjointSolver::Pathwise, {}, 1);
    std::vector<LinearizedTrajectory> lin{linearized_solve(m, ens.paths[0], lift_direction(m, *lc, dir))};
    DualityReport r = duality_check(m, ens, lin, adj, td, tg, DualityMode::PathwiseDet);
    pass = pass && r.relative <= tol;
    detail += kv(tag, r.relative);
  };
  pathwise(*desk_model(false), desk_y0(), 1e-6, "pathwise_desk");
  auto small = build_model(oracle_spec());
  pathwise(*small, oracle_y0(small->n()), 1e-11, "pathwise_n8");

  const Model& m = *desk_model(true);
  ControlPair u = shape(m, 0.4, 0.3, 1, 2), dir = shape(m, 0.2, -0.25, 2, 1);
  Target tg = smooth_target(m);
  auto lc = lift_controls(m, u);
  TrackingData td = make_tracking(m, *lc, tg);
  Ensemble ens = forward_ensemble(m, desk_y0(), lc, 11, 512, 1);
  AdjointEnsemble adj = adjoint_solve(m, ens, td, tg, AdjointSolver::Regression, {}, 1);
  auto ld = lift_direction(m, *lc, dir);
  std::vector<LinearizedTrajectory> lin;
  for (const auto& tr : ens.paths) lin.push_back(linearized_solve(m, tr, ld));
  DualityReport r = duality_check(m, ens, lin, adj, td, tg, DualityMode::Expectation);
  pass = pass && std::abs(r.defect) <= 3 * r.stderr_;
  detail += kv("expectation_defect", r.defect) + kv("stderr", r.stderr_) + kv("lhs", r.lhs);
  return {pass, detail};
}

Outcome fd_gradient() {
  std::string detail;
  bool pass = true;
  auto run = [&](std::shared_ptr<const Model> model, const Vec& y0, double tol, const char* tag) {
    Problem pb;
    pb.model = model;
    pb.y0 = y0;
    pb.target = smooth_target(*model);
    ControlPair u = project_admissible(shape(*model, 0.4, 0.3, 1, 2), pb.set, model->ops->mesh);
    GradientPair g = gradient(pb, evaluate(pb, u)).gradient;
    double worst = 0.0;
    for (int d = 0; d < 10; ++d) {
      ControlPair f = random_direction(*model, 500 + d);
      double h = 1e-5;
      double fd = (evaluate(pb, u + f * h).cost.total - evaluate(pb, u + f * (-h)).cost.total) / (2 * h);
      worst = std::max(worst, std::abs(fd - gamma_inner(*model, g.g, f)) / std::abs(fd));
    }
    pass = pass && worst <= tol;
    detail += kv(tag, worst);
  };
  auto small = build_model(oracle_spec());
  run(small, oracle_y0(small->n()), 1e-6, "max_rel_err_n8");
  run(desk_model(false), desk_y0(), 1e-4, "max_rel_err_desk");
  return {pass, detail};
}

struct OptimizerState {
  bool ran = false;
  std::shared_ptr<const Model> model;
  PgdResult result;
  ExperimentConfig cfg;
} g_opt;

ExperimentConfig desk_config() { return load_config(std::string(NSSLIP_SOURCE_DIR) + "/configs/desk.json"); }

Outcome optimizer() {
  ExperimentConfig cfg = desk_config();
  auto model = build_model(cfg.model);
  Problem pb = make_problem(cfg, model);
  ControlPair zero = ControlPair::zeros(model->nodes(), model->time.steps + 1);
  ControlPair known = project_admissible(make_controls(cfg.target.control, *model), cfg.set, model->ops->mesh);
  double j0 = evaluate(pb, zero).cost.total, jk = evaluate(pb, known).cost.total;
  PgdResult r = optimize_pgd(pb, zero, cfg.optimizer);
  double recovered = (j0 - r.cost.total) / (j0 - jk);
  g_opt = {true, model, r, cfg};

  ExperimentConfig q = load_config(std::string(NSSLIP_SOURCE_DIR) + "/configs/quadratic.json");
  auto qm = build_model(q.model);
  Problem qp = make_problem(q, qm);
  ControlPair ne = normal_equations_solution(qp);
  PgdResult qr = optimize_pgd(qp, ControlPair::zeros(qm->nodes(), qm->time.steps + 1), q.optimizer);
  double pg = qr.trace.back().pg_norm;
  double dist = gamma_norm(*qm, qr.controls - ne) / std::max(1.0, gamma_norm(*qm, ne));
  return {recovered >= 0.8 && r.trace.back().iteration <= 50 && pg <= 1e-6 && dist <= 1e-6,
          kv("J0", j0) + kv("J_known", jk) + kv("J_final", r.cost.total) + kv("gap_recovered", recovered) +
              "iterations=" + std::to_string(r.trace.back().iteration) + " " + kv("surrogate_pg", pg) +
              kv("surrogate_rel_dist", dist)};
}

Outcome optimality() {
  if (!g_opt.ran) optimizer();
  OptimalityReport op = optimality_residual(*g_opt.model, g_opt.result.controls, g_opt.result.gradient, g_opt.cfg.set,
                                            g_opt.cfg.cost, 64, 2024);
  return {op.normalized >= -1e-4, kv("normalized_residual", op.normalized) + kv("residual", op.residual) +
                                      kv("scale", op.scale) + "probes=" + std::to_string(op.probes)};
}

Outcome noise() {
  const Model& m = *desk_model(true);
  NoiseAssumptionReport r = validate_assumptions(m.noise, m.basis, 1000, 99);
  bool pass = r.l_est <= m.noise.bound_l && std::isfinite(r.k_est) && (r.remainder_vanishes || r.frechet_slope >= 1.9) &&
              r.adjoint_defect <= 1e-12;
  return {pass, kv("L_est", r.l_est) + kv("L", m.noise.bound_l) + kv("K_est", r.k_est) +
                    kv("frechet_slope", r.frechet_slope) + kv("adjoint_defect", r.adjoint_defect)};
}

Outcome regression() {
  const Model& m = *desk_model(true);
  ControlPair u = shape(m, 0.4, 0.3, 1, 2);
  Target tg = smooth_target(m);
  auto lc = lift_controls(m, u);
  TrackingData td = make_tracking(m, *lc, tg);
  std::vector<double> res;
  for (int M : {128, 256, 512}) {
    Ensemble ens = forward_ensemble(m, desk_y0(), lc, 11, M, 1);
    AdjointEnsemble adj = adjoint_solve(m, ens, td, tg, AdjointSolver::Regression, {}, 1);
    res.push_back(adj.martingale_residual.norm());
  }
  double r1 = res[1] / res[0], r2 = res[2] / res[1];
  bool halves = std::abs(r1 - 0.5) <= 0.15 && std::abs(r2 - 0.5) <= 0.15;

  const Model& det = *desk_model(false);
  auto dlc = lift_controls(det, u);
  TrackingData dtd = make_tracking(det, *dlc, tg);
  Ensemble ens = forward_ensemble(det, desk_y0(), dlc, 11, 4 * det.n() + 8, 1);
  AdjointEnsemble a = adjoint_solve(det, ens, dtd, tg, AdjointSolver::Pathwise, {}, 1);
  AdjointEnsemble b = adjoint_solve(det, ens, dtd, tg, AdjointSolver::Regression, {}, 1);
  double diff = 0.0;
  for (const auto& p : b.paths) diff = std::max(diff, (p.p - a.paths[0].p).cwiseAbs().maxCoeff());
  diff /= a.paths[0].p.cwiseAbs().maxCoeff();
  return {halves && diff <= 1e-8, kv("residual_128", res[0]) + kv("ratio_256", r1) + kv("ratio_512", r2) +
                                      kv("zero_noise_rel_diff", diff)};
}

Outcome integrability() {
  ExperimentConfig cfg = desk_config();
  cfg.samples = 512;
  auto model = build_model(cfg.model);
  Problem pb = make_problem(cfg, model);
  ControlPair u = make_controls(cfg.target.control, *model);
  u = project_admissible(u, cfg.set, model->ops->mesh);
  Evaluation e = evaluate(pb, u);
  AdjointEnsemble adj = adjoint_solve(*model, e.ens, e.td, pb.target, AdjointSolver::Pathwise, {}, 1);
  WeightConstants w = fit_weight_constants(pb, e, adj, 32);
  InequalityReport iq = inequality_constants(model->basis, *model->ops);
  double k_lip = validate_assumptions(model->noise, model->basis, 200, 99).k_est;
  ConstantsLedger ledger = constants_report(*model, pb.set, w, iq.c_hat, k_lip);
  IntegrabilityConstants ic = integrability_constants(ledger);

  std::vector<const ForwardTrajectory*> half, all;
  for (int s = 0; s < e.ens.size(); ++s) {
    all.push_back(&e.ens.paths[s]);
    if (s < 256) half.push_back(&e.ens.paths[s]);
  }
  // The admissible-set sup makes r* large; the realized variant uses the controls actually applied.
  double n_real = 0.0;
  for (int k = 0; k < u.time_nodes(); ++k) n_real = std::max(n_real, u.surrogate_norm_at(k, model->ops->mesh));
  IntegrabilityConstants real = ic;
  const double nu = ic.nu, L = ic.bound_l, T = ic.horizon;
  real.r_star = 2.0 * ledger.fitted.c0 * (1.0 + n_real * n_real);
  real.a_star = nu * nu * std::exp(-2.0 * real.r_star * T) / (2.0 * L);
  real.b_star = nu * nu * std::exp(-8.0 * (real.r_star + L) * T) / (8.0 * L);

  bool finite = true, stable = true;
  std::string detail;
  for (const auto& [tag, k] : {std::pair<std::string, IntegrabilityConstants>{"sup", ic}, {"real", real}}) {
    ExpMomentReport a = exp_integrability_stats(*model, half, k), b = exp_integrability_stats(*model, all, k);
    detail += kv(tag + "_r*", k.r_star);
    for (int q = 0; q < 4; ++q) {
      finite = finite && std::isfinite(a.mean[q]) && std::isfinite(b.mean[q]) && !a.capped[q] && !b.capped[q];
      double se = std::sqrt(a.stderr_[q] * a.stderr_[q] + b.stderr_[q] * b.stderr_[q]);
      double diff = std::abs(a.mean[q] - b.mean[q]);
      stable = stable && diff <= 2 * se;
      detail += kv(tag + "_m" + std::to_string(q), b.mean[q]) + kv("z", se > 0 ? diff / se : 0.0);
    }
  }
  bool monotone = true;
  for (const auto& tr : e.ens.paths)
    for (auto k : {WeightKind::Xi0, WeightKind::Xi1, WeightKind::Xi2}) {
      WeightProcess wp = weight_path(k, ledger.fitted, *model, tr, u);
      for (int i = 1; i < wp.xi.size(); ++i) monotone = monotone && wp.xi[i] <= wp.xi[i - 1];
    }
  detail += std::string("weights_monotone=") + (monotone ? "yes" : "no");
  return {finite && stable && monotone, detail};
}

Outcome reproducibility() {
  ExperimentConfig cfg = desk_config();
  std::ostringstream log;
  std::string dirs[2] = {"acceptance_runs/repro_a", "acceptance_runs/repro_b"};
  for (const auto& d : dirs) {
    std::filesystem::remove_all(d);
    cfg.output_dir = d;
    if (run_command("optimize", cfg, log) != kExitOk) return {false, "optimize failed: " + log.str()};
  }
  bool same = true;
  std::string detail;
  for (const char* f : {"control/trace.csv", "control/controls_final.json"}) {
    std::string a = slurp(std::filesystem::path(dirs[0]) / f), b = slurp(std::filesystem::path(dirs[1]) / f);
    bool eq = !a.empty() && a == b;
    same = same && eq;
    detail += std::string(f) + (eq ? "=identical(" : "=DIFFERENT(") + std::to_string(a.size()) + " bytes) ";
  }
  return {same, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"eigenbasis", eigenbasis},       {"lifting", lifting},       {"energy_identity", energy},
      {"gateaux", gateaux},             {"duality", duality},       {"gradient_fd", fd_gradient},
      {"optimizer", optimizer},         {"optimality", optimality}, {"noise_assumptions", noise},
      {"regression_adjoint", regression}, {"exp_integrability", integrability}, {"reproducibility", reproducibility}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %2d %-20s %s  %s [%.1fs]\n", id, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), wall);
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
