#include "nsslip/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "json_io.hpp"

namespace fs = std::filesystem;

namespace nsslip {

std::string version_string() { return "nsslip 1.0.0"; }

bool VerifyReport::passed() const {
  for (const auto& c : checks)
    if (c.status == "FAIL") return false;
  return true;
}

namespace {

class RunDir {
 public:
  explicit RunDir(const std::string& root) : root_(root) { fs::create_directories(root_); }

  void write(const std::string& rel, const std::string& text) {
    fs::path p = root_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    out << text;
    outputs_.push_back(rel);
  }
  const std::vector<std::string>& outputs() const { return outputs_; }
  const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  std::vector<std::string> outputs_;
};

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string s;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) s += ',';
    s += c;
    first = false;
  }
  return s + "\n";
}

std::string num(double v) { return fmt17(v); }
std::string num(int v) { return std::to_string(v); }

ControlPair initial_controls(const ExperimentConfig& cfg, const Model& model) {
  return project_admissible(make_controls(cfg.initial_controls, model), cfg.set, model.ops->mesh);
}

ExperimentConfig deterministic_variant(const ExperimentConfig& cfg) {
  ExperimentConfig d = cfg;
  d.model.noise.family = NoiseFamily::Zero;
  d.samples = 1;
  return d;
}

// Ledger fits at the given controls, on at most 32 samples.
ConstantsLedger ledger_at(const Problem& pb, const Evaluation& e, const AdjointEnsemble& adj) {
  const Model& model = *pb.model;
  WeightConstants w = fit_weight_constants(pb, e, adj, 32);
  InequalityReport iq = inequality_constants(model.basis, *model.ops);
  double k_lip = 0.0;
  if (model.noise.m > 0) k_lip = validate_assumptions(model.noise, model.basis, 200, 99).k_est;
  return constants_report(model, pb.set, w, iq.c_hat, k_lip);
}

std::string ledger_json(const ConstantsLedger& l) {
  json j;
  j["fitted"] = {{"c0", l.fitted.c0}, {"c1", l.fitted.c1}, {"c2", l.fitted.c2}, {"ct1", l.fitted.ct1}, {"ct2", l.fitted.ct2}};
  j["c_hat"] = l.c_hat;
  j["nu"] = l.nu;
  j["bound_l"] = l.bound_l;
  j["k_lip"] = l.k_lip;
  j["horizon"] = l.horizon;
  j["n_sup"] = l.n_sup;
  j["r_star"] = l.r_star;
  j["lambda_star_0"] = l.lambda_star0;
  j["lambda_star_T"] = l.lambda_star_t;
  j["a_star"] = l.a_star;
  j["beta_star_0"] = l.beta_star0;
  j["beta_star_T"] = l.beta_star_t;
  j["b_star"] = l.b_star;
  j["verdicts"] = {
      {"CF", {{"verdict", l.verdict_cf}, {"lhs", l.lhs_cf}, {"rhs", l.rhs_cf}}},
      {"C_A1", {{"verdict", l.verdict_ca1}, {"lhs", l.lhs_ca1}, {"rhs", l.rhs_ca1}}},
      {"cnd_1", {{"verdict", l.verdict_cnd1}, {"lhs", l.lhs_cnd1}, {"rhs", l.rhs_cnd1}}}};
  j["surrogate"] = l.surrogate;
  return dump17(j);
}

void warn_ledger(const ConstantsLedger& l, std::ostream& log) {
  if (l.verdict_cf == "FAIL")
    log << "warning: viscosity-vs-noise condition fails with the estimated constants (lhs " << fmt17(l.lhs_cf)
        << " < rhs " << fmt17(l.rhs_cf) << ")\n";
}

void write_manifest(RunDir& dir, const ExperimentConfig& cfg, const std::string& command, int status,
                    double wall, const json& extra) {
  json j;
  j["version"] = version_string();
  j["subcommand"] = command;
  j["seed"] = cfg.seed;
  j["exit_status"] = status;
  j["wall_clock_seconds"] = wall;
  j["config"] = json::parse(serialize_config(cfg));
  std::vector<std::string> outs = dir.outputs();
  outs.push_back("manifest.json");
  j["outputs"] = outs;
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  std::ofstream out(dir.root() / "manifest.json", std::ios::binary);
  out << dump17(j);
}

json cmd_simulate(const ExperimentConfig& cfg, RunDir& dir, std::ostream& log) {
  auto model = build_model(cfg.model);
  Problem pb = make_problem(cfg, model);
  ControlPair u = initial_controls(cfg, *model);
  Evaluation e = evaluate(pb, u);
  const int n = model->n(), steps = model->time.steps, m = e.ens.size();
  const Vec& lam = model->basis.lambda;

  std::string traj = "sample,k,t";
  for (int i = 0; i < n; ++i) traj += ",c" + std::to_string(i);
  traj += "\n";
  std::string energy = csv_row({"sample", "k", "t", "energy_h", "energy_v"});
  std::string led = csv_row({"sample", "k", "dissipation", "numerical", "lifting_work", "noise_work",
                             "convection_increment", "coupling", "boundary_work", "defect"});
  for (int s = 0; s < m; ++s) {
    const ForwardTrajectory& tr = e.ens.paths[s];
    for (int k = 0; k <= steps; ++k) {
      Vec y = tr.projected(k);
      traj += num(s) + "," + num(k) + "," + num(model->time.time(k));
      for (int i = 0; i < n; ++i) traj += "," + num(y[i]);
      traj += "\n";
      Vec c = tr.c.col(k);
      energy += csv_row({num(s), num(k), num(model->time.time(k)), num(c.squaredNorm()), num(c.cwiseProduct(lam).dot(c))});
    }
    const EnergyLedger& l = tr.ledger;
    for (int k = 0; k < steps; ++k)
      led += csv_row({num(s), num(k), num(l.dissipation[k]), num(l.numerical[k]), num(l.lifting_work[k]),
                      num(l.noise_work[k]), num(l.convection_increment[k]), num(l.coupling[k]),
                      num(l.boundary_work[k]), num(l.defect[k])});
  }
  dir.write("dynamics/trajectories.csv", traj);
  dir.write("dynamics/energy.csv", energy);
  dir.write("dynamics/energy_ledger.csv", led);

  AdjointEnsemble adj = adjoint_solve(*model, e.ens, e.td, pb.target, AdjointSolver::Pathwise, {}, cfg.threads);
  ConstantsLedger ledger = ledger_at(pb, e, adj);
  warn_ledger(ledger, log);
  dir.write("control/ledger.json", ledger_json(ledger));

  std::string wcsv = csv_row({"sample", "k", "t", "xi0", "xi1", "xi2", "beta"});
  for (int s = 0; s < m; ++s) {
    std::array<WeightProcess, 4> w;
    const WeightKind kinds[4] = {WeightKind::Xi0, WeightKind::Xi1, WeightKind::Xi2, WeightKind::Beta};
    for (int q = 0; q < 4; ++q) w[q] = weight_path(kinds[q], ledger.fitted, *model, e.ens.paths[s], u);
    for (int k = 0; k <= steps; ++k)
      wcsv += csv_row({num(s), num(k), num(model->time.time(k)), num(w[0].xi[k]), num(w[1].xi[k]), num(w[2].xi[k]),
                       num(w[3].xi[k])});
  }
  dir.write("dynamics/weights.csv", wcsv);

  json mom;
  if (ledger.bound_l > 0 && m >= 64) {
    std::vector<const ForwardTrajectory*> ptrs;
    for (const auto& tr : e.ens.paths) ptrs.push_back(&tr);
    ExpMomentReport r = exp_integrability_stats(*model, ptrs, integrability_constants(ledger));
    const char* names[4] = {"sup_energy", "dissipation", "energy_dissipation", "quartic"};
    mom["status"] = "COMPUTED";
    mom["samples"] = r.samples;
    for (int q = 0; q < 4; ++q)
      mom[names[q]] = {{"mean", r.mean[q]},
                       {"stderr", r.stderr_[q]},
                       {"max_exponent", r.max_exponent[q]},
                       {"heavy_tail", r.heavy_tail[q]},
                       {"capped", r.capped[q]}};
  } else {
    mom["status"] = "SKIPPED";
    mom["reason"] = ledger.bound_l > 0 ? "needs at least 64 samples" : "ZERO noise";
  }
  dir.write("dynamics/exp_moments.json", dump17(mom));
  dir.write("dynamics/cost.json", dump17(json{{"tracking", e.cost.tracking},
                                              {"control_a", e.cost.control_a},
                                              {"control_b", e.cost.control_b},
                                              {"total", e.cost.total},
                                              {"stderr", e.cost.stderr_total},
                                              {"samples", e.cost.samples}}));
  log << "simulate: " << m << " samples, J = " << fmt17(e.cost.total) << "\n";
  return json::object();
}

json cmd_optimize(const ExperimentConfig& cfg, RunDir& dir, std::ostream& log) {
  auto model = build_model(cfg.model);
  Problem pb = make_problem(cfg, model);
  ControlPair u0 = initial_controls(cfg, *model);
  {
    Evaluation e = evaluate(pb, u0);
    AdjointEnsemble adj = adjoint_solve(*model, e.ens, e.td, pb.target, AdjointSolver::Pathwise, {}, cfg.threads);
    ConstantsLedger ledger = ledger_at(pb, e, adj);
    warn_ledger(ledger, log);
    dir.write("control/ledger.json", ledger_json(ledger));
  }
  PgdResult r = optimize_pgd(pb, u0, cfg.optimizer);

  std::string trace = csv_row({"iteration", "J", "stderr", "step", "pg_norm", "backtracks"});
  json timing = json::array();
  for (const auto& row : r.trace) {
    trace += csv_row({num(row.iteration), num(row.j), num(row.stderr_), num(row.step), num(row.pg_norm),
                      num(row.backtracks)});
    timing.push_back(row.wall);
  }
  dir.write("control/trace.csv", trace);

  const auto& mesh = model->ops->mesh;
  std::string grad = csv_row({"node", "k", "t", "s", "g_a", "g_b", "stderr_a", "stderr_b"});
  for (int k = 0; k < r.controls.time_nodes(); ++k)
    for (int q = 0; q < r.controls.nodes(); ++q)
      grad += csv_row({num(q), num(k), num(model->time.time(k)), num(mesh.arclength[q]), num(r.gradient.g.a(q, k)),
                       num(r.gradient.g.b(q, k)), num(r.gradient.stderr_.a(q, k)), num(r.gradient.stderr_.b(q, k))});
  dir.write("control/gradient.csv", grad);
  dir.write("control/controls_final.json", controls_json(r.controls, r.status, r.cost.total));

  OptimalityReport opt = optimality_residual(*model, r.controls, r.gradient, cfg.set, cfg.cost, 64, cfg.seed);
  dir.write("control/optimality.json", dump17(json{{"residual", opt.residual},
                                                   {"normalized", opt.normalized},
                                                   {"scale", opt.scale},
                                                   {"probes", opt.probes}}));

  Evaluation fin = evaluate(pb, r.controls);
  AdjointEnsemble adj = adjoint_solve(*model, fin.ens, fin.td, pb.target, cfg.solver, cfg.regression, cfg.threads);
  std::string acsv = csv_row({"k", "t", "p_norm", "q_norm", "martingale_residual"});
  for (int k = 0; k <= model->time.steps; ++k) {
    double pn = 0.0, qn = 0.0;
    for (const auto& a : adj.paths) {
      pn += a.p.col(k).norm();
      if (a.q.size() > 0 && k < model->time.steps) qn += a.q.col(k).norm();
    }
    double mr = k < model->time.steps ? adj.martingale_residual[k] : 0.0;
    acsv += csv_row({num(k), num(model->time.time(k)), num(pn / adj.paths.size()), num(qn / adj.paths.size()), num(mr)});
  }
  dir.write("adjoint/adjoint.csv", acsv);

  log << "optimize: " << r.status << " after " << r.trace.back().iteration << " iterations, J "
      << fmt17(r.trace.front().j) << " -> " << fmt17(r.cost.total) << "\n";
  return json{{"status", r.status}, {"iteration_wall_seconds", timing}};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ControlPair probe_direction(const Model& model, double scale, std::uint64_t seed) {
  const auto& mesh = model.ops->mesh;
  const int p = model.nodes(), nt = model.time.steps + 1;
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  double ca[3], cb[3];
  for (int i = 0; i < 3; ++i) {
    ca[i] = normal(rng);
    cb[i] = normal(rng);
  }
  ControlPair d = ControlPair::zeros(p, nt);
  for (int k = 0; k < nt; ++k) {
    double t = model.time.time(k) / model.time.horizon;
    for (int q = 0; q < p; ++q) {
      double s = 2.0 * M_PI * mesh.arclength[q] / mesh.perimeter;
      d.a(q, k) = scale * (ca[0] * std::cos(s) + ca[1] * std::sin(2 * s) * t + ca[2] * std::cos(3 * s) * (1 - t));
      d.b(q, k) = scale * (cb[0] * std::sin(s) + cb[1] * std::cos(2 * s) * t + cb[2] * std::sin(3 * s) * (1 - t));
    }
    d.a.col(k) = enforce_compatibility(d.a.col(k), mesh);
  }
  return d;
}

void flip(AdjointEnsemble& adj) {
  for (auto& a : adj.paths) {
    a.p = -a.p;
    a.s = -a.s;
    a.eta = -a.eta;
    a.lambda0 = -a.lambda0;
  }
}

}  // namespace

VerifyReport run_verify_suite(const ExperimentConfig& cfg, std::ostream& log) {
  VerifyReport rep;
  auto add = [&](CheckResult c) {
    log << (c.status == "PASS" ? "PASS   " : c.status == "FAIL" ? "FAIL   " : "SKIPPED") << " " << c.name;
    for (const auto& [k, v] : c.metrics) log << "  " << k << "=" << fmt17(v);
    if (!c.message.empty()) log << "  (" << c.message << ")";
    log << "\n";
    rep.checks.push_back(std::move(c));
  };
  auto verdict = [](bool ok) { return ok ? std::string("PASS") : std::string("FAIL"); };
  const bool stochastic = cfg.model.noise.family != NoiseFamily::Zero;
  ExperimentConfig dcfg = deterministic_variant(cfg);
  auto model = build_model(cfg.model);
  auto dmodel = stochastic ? build_model(dcfg.model) : model;
  const DiscreteOperators& ops = *model->ops;
  const Vec y0 = initial_state(cfg);
  ControlPair u = initial_controls(cfg, *model);

  {  // operator transposition: divergence against face gradient, convection residual and gradients against the form
    std::mt19937_64 rng(splitmix64(cfg.seed + 1));
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec f = Vec::Zero(ops.n_full), pcell(ops.grid.num_cells());
    for (int d : ops.free_dofs)
      if (d < ops.n_xfaces + ops.n_yfaces) f[d] = normal(rng);
    for (int c = 0; c < pcell.size(); ++c) pcell[c] = normal(rng);
    double lhs = ops.grid.cell_area() * pcell.dot(ops.div * f);
    double rhs = -f.dot(ops.mass.cwiseProduct(ops.grad * pcell));
    double rel = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);

    const Trilinear& tri = *model->tri;
    auto random_field = [&]() {
      Vec in(model->inputs());
      for (int i = 0; i < in.size(); ++i) in[i] = normal(rng);
      Vec c(model->n());
      for (int i = 0; i < c.size(); ++i) c[i] = normal(rng);
      return Vec(model->lift.matrix * in + model->basis.e * c);
    };
    double conv = 0.0;
    for (int t = 0; t < 3; ++t) {
      Vec w = random_field(), z = random_field(), phi = random_field();
      auto pw = tri.eval(w), pz = tri.eval(z), pp = tri.eval(phi);
      double b = tri.form(pw, pz, pp);
      double r1 = tri.residual(pw, pz).dot(phi), r2 = tri.grad_w(pz, pp).dot(w), r3 = tri.grad_z(pw, pp).dot(z);
      double sc = std::max(std::abs(b), 1e-300);
      conv = std::max({conv, std::abs(r1 - b) / sc, std::abs(r2 - b) / sc, std::abs(r3 - b) / sc});
    }
    add({"operator_transposition", verdict(rel <= 1e-12 && conv <= 1e-10),
         {{"div_grad_relative", rel}, {"convection_relative", conv}}, ""});
  }
  {
    const GalerkinBasis& b = model->basis;
    Mat gram = b.me * b.e;
    Mat kg = b.e.transpose() * (ops.vgram * b.e);
    double gd = (gram - Mat::Identity(b.n, b.n)).cwiseAbs().maxCoeff();
    double kd = (kg - Mat(b.lambda.asDiagonal())).cwiseAbs().maxCoeff() / b.lambda.maxCoeff();
    add({"eigenbasis_gram", verdict(gd <= 1e-10 && kd <= 1e-10), {{"mass_defect", gd}, {"stiffness_defect", kd}}, ""});
  }
  {
    std::mt19937_64 rng(splitmix64(cfg.seed + 2));
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < cfg.verify.lifting_trials; ++t) {
      Vec a(ops.n_nodes), bb(ops.n_nodes);
      for (int q = 0; q < ops.n_nodes; ++q) {
        a[q] = normal(rng);
        bb[q] = normal(rng);
      }
      LiftingField lf = model->lifting->solve(enforce_compatibility(a, ops.mesh), bb);
      worst = std::max({worst, lf.stokes_residual, lf.normal_mismatch, lf.slip_mismatch});
    }
    add({"lifting_residuals", verdict(worst <= 1e-8), {{"max_relative_residual", worst}}, ""});
  }
  {
    auto lc = lift_controls(*model, u);
    ForwardTrajectory tr = forward_solve(*model, y0, lc, sample_brownian(derived_seed(cfg.seed, 0), model->noise.m, model->time));
    double d1 = (tr.ledger.defect - tr.ledger.boundary_work).cwiseAbs().maxCoeff();
    ControlPair ub{Mat::Zero(u.nodes(), u.time_nodes()), u.b};
    ForwardTrajectory tb = forward_solve(*model, y0, lift_controls(*model, ub), tr.path);
    double d0 = tb.ledger.defect.cwiseAbs().maxCoeff();
    add({"energy_defect", verdict(d0 <= 1e-8 && d1 <= 1e-8),
         {{"defect_a_zero", d0}, {"defect_minus_boundary_work", d1}}, ""});
  }
  ControlPair dir = probe_direction(*model, cfg.verify.direction_scale, cfg.seed + 3);
  {
    auto rows = gateaux_check(*dmodel, y0, u, dir, cfg.verify.gateaux_eps, 1, cfg.seed, cfg.threads);
    std::vector<double> e, h;
    for (const auto& r : rows) {
      e.push_back(r.eps);
      h.push_back(r.mean_h);
    }
    double slope = loglog_slope(e, h);
    add({"gateaux_deterministic", verdict(std::abs(slope - 2.0) <= 0.3), {{"slope", slope}}, ""});
    if (stochastic) {
      auto srows = gateaux_check(*model, y0, u, dir, cfg.verify.gateaux_eps, cfg.verify.gateaux_samples, cfg.seed,
                                 cfg.threads);
      bool mono = true;
      int blow = 0;
      for (size_t i = 1; i < srows.size(); ++i) mono = mono && srows[i].mean_h < srows[i - 1].mean_h;
      for (const auto& r : srows) blow += r.blowups;
      double ratio = srows.back().mean_h / srows.front().mean_h;
      add({"gateaux_stochastic", verdict(mono && ratio <= 1e-3 && blow == 0),
           {{"ratio", ratio}, {"monotone", mono ? 1.0 : 0.0}, {"blowups", static_cast<double>(blow)}}, ""});
    } else {
      add({"gateaux_stochastic", "SKIPPED", {}, "ZERO noise"});
    }
  }
  {
    Problem dp = make_problem(dcfg, dmodel);
    Evaluation e = evaluate(dp, u);
    AdjointEnsemble adj = adjoint_solve(*dmodel, e.ens, e.td, dp.target, AdjointSolver::Pathwise, {}, 1);
    if (cfg.verify.fault == "adjoint_sign") flip(adj);
    auto ld = lift_direction(*dmodel, *e.lifted, dir);
    std::vector<LinearizedTrajectory> lin{linearized_solve(*dmodel, e.ens.paths[0], ld)};
    DualityReport r = duality_check(*dmodel, e.ens, lin, adj, e.td, dp.target, DualityMode::PathwiseDet);
    add({"duality_pathwise_det", verdict(r.relative <= 1e-6),
         {{"lhs", r.lhs}, {"rhs", r.rhs}, {"relative_defect", r.relative}}, ""});

    // Central differences of the discrete deterministic cost.
    GradientResult gr = gradient(dp, e);
    double worst = 0.0;
    for (int d = 0; d < cfg.verify.fd_directions; ++d) {
      ControlPair f = probe_direction(*dmodel, 1.0, cfg.seed + 100 + d);
      double h = cfg.verify.fd_step;
      double jp = evaluate(dp, u + f * h).cost.total, jm = evaluate(dp, u + f * (-h)).cost.total;
      double fd = (jp - jm) / (2 * h), an = gamma_inner(*dmodel, gr.gradient.g, f);
      worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(fd), 1e-300));
    }
    add({"fd_gradient", verdict(worst <= 1e-4), {{"max_relative_error", worst}}, ""});
  }
  if (stochastic) {
    ExperimentConfig scfg = cfg;
    scfg.samples = cfg.verify.duality_samples;
    Problem sp = make_problem(scfg, model);
    Evaluation e = evaluate(sp, u);
    AdjointEnsemble adj = adjoint_solve(*model, e.ens, e.td, sp.target, AdjointSolver::Regression, cfg.regression, cfg.threads);
    if (cfg.verify.fault == "adjoint_sign") flip(adj);
    auto ld = lift_direction(*model, *e.lifted, dir);
    std::vector<LinearizedTrajectory> lin(e.ens.size());
    parallel_for(e.ens.size(), cfg.threads, [&](int s) { lin[s] = linearized_solve(*model, e.ens.paths[s], ld); });
    DualityReport r = duality_check(*model, e.ens, lin, adj, e.td, sp.target, DualityMode::Expectation);
    add({"duality_expectation", verdict(std::abs(r.defect) <= 3.0 * r.stderr_ + 1e-12 * std::abs(r.lhs)),
         {{"lhs", r.lhs}, {"rhs", r.rhs}, {"defect", r.defect}, {"stderr", r.stderr_}}, ""});
    try {
      NoiseAssumptionReport nr = validate_assumptions(model->noise, model->basis, cfg.verify.noise_samples, cfg.seed);
      bool ok = nr.l_est <= model->noise.bound_l && std::isfinite(nr.k_est) &&
                (nr.remainder_vanishes || nr.frechet_slope >= 1.9) && nr.adjoint_defect <= 1e-12;
      add({"noise_assumptions", verdict(ok),
           {{"l_est", nr.l_est}, {"bound_l", model->noise.bound_l}, {"k_est", nr.k_est},
            {"frechet_slope", nr.frechet_slope}, {"adjoint_defect", nr.adjoint_defect}}, ""});
    } catch (const AssumptionViolation& e) {
      add({"noise_assumptions", "FAIL", {}, e.what()});
    }
  } else {
    add({"duality_expectation", "SKIPPED", {}, "ZERO noise"});
    add({"noise_assumptions", "SKIPPED", {}, "ZERO noise"});
  }
  return rep;
}

namespace {

json cmd_verify(const ExperimentConfig& cfg, RunDir& dir, std::ostream& log, bool& passed) {
  VerifyReport rep = run_verify_suite(cfg, log);
  json checks = json::array();
  for (const auto& c : rep.checks) {
    json m = json::object();
    for (const auto& [k, v] : c.metrics) m[k] = v;
    checks.push_back({{"name", c.name}, {"status", c.status}, {"metrics", m}, {"message", c.message}});
  }
  passed = rep.passed();
  dir.write("verify/report.json", dump17(json{{"passed", passed}, {"checks", checks}}));
  return json::object();
}

json cmd_spectrum(const ExperimentConfig& cfg, RunDir& dir, std::ostream& log) {
  Geometry geo = build_geometry(cfg.model.domain);
  auto ops = std::make_shared<const DiscreteOperators>(assemble_operators(geo.grid, geo.mesh, cfg.model.alpha, cfg.model.nu));
  if (cfg.model.n > ops->n_psi)
    throw ConfigError("basis.n = " + std::to_string(cfg.model.n) + " exceeds the discrete subspace dimension " +
                      std::to_string(ops->n_psi));
  GalerkinBasis b = stokes_eigenbasis(*ops, cfg.model.n);
  std::string csv = csv_row({"k", "lambda"});
  for (int k = 0; k < b.n; ++k) csv += csv_row({num(k + 1), num(b.lambda[k])});
  dir.write("operators/spectrum.csv", csv);
  InequalityReport iq = inequality_constants(b, *ops);
  Mat gram = b.me * b.e;
  double gd = (gram - Mat::Identity(b.n, b.n)).cwiseAbs().maxCoeff();
  double kd = (b.e.transpose() * (ops->vgram * b.e) - Mat(b.lambda.asDiagonal())).cwiseAbs().maxCoeff();
  dir.write("operators/inequalities.json", dump17(json{{"li4", iq.li4},
                                                       {"trace2", iq.trace2},
                                                       {"korn", iq.korn},
                                                       {"c_hat", iq.c_hat},
                                                       {"samples", iq.samples},
                                                       {"gram_mass_defect", gd},
                                                       {"gram_stiffness_defect", kd}}));
  log << "spectrum: lambda_1 = " << fmt17(b.lambda[0]) << ", gram defect " << fmt17(gd) << "\n";
  return json::object();
}

}  // namespace

int run_command(const std::string& command, const ExperimentConfig& cfg, std::ostream& log) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  if (command != "simulate" && command != "optimize" && command != "verify" && command != "spectrum") {
    log << "error: unknown subcommand '" << command << "'\n";
    return kExitConfig;
  }
  RunDir dir(cfg.output_dir);
  dir.write("config.json", serialize_config(cfg));
  int status = kExitOk;
  json extra = json::object();
  try {
    if (command == "simulate") extra = cmd_simulate(cfg, dir, log);
    if (command == "optimize") extra = cmd_optimize(cfg, dir, log);
    if (command == "spectrum") extra = cmd_spectrum(cfg, dir, log);
    if (command == "verify") {
      bool passed = true;
      extra = cmd_verify(cfg, dir, log, passed);
      if (!passed) status = kExitVerify;
    }
  } catch (const BlowUpError& e) {
    log << "error: numerical blow-up: " << e.what() << "\n";
    status = kExitBlowUp;
    extra["error"] = e.what();
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    status = kExitConfig;
    extra["error"] = e.what();
  }
  double wall = std::chrono::duration<double>(clock::now() - start).count();
  write_manifest(dir, cfg, command, status, wall, extra);
  return status;
}

}  // namespace nsslip
