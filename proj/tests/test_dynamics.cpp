#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nsslip/dynamics.hpp"

using namespace nsslip;

namespace {

ModelSpec small_spec(NoiseFamily f = NoiseFamily::Zero) {
  ModelSpec s;
  s.domain.nx = s.domain.ny = 10;
  s.n = 6;
  s.steps = 32;
  s.noise.family = f;
  if (f != NoiseFamily::Zero) {
    s.noise.channels = 2;
    s.noise.bound_l = 1e-2;
  }
  return s;
}

ControlPair wave(const Model& m, double amp) {
  ControlPair u = ControlPair::zeros(m.nodes(), m.time.steps + 1);
  const auto& mesh = m.ops->mesh;
  for (int k = 0; k <= m.time.steps; ++k)
    for (int q = 0; q < m.nodes(); ++q) {
      double s = 2 * M_PI * mesh.arclength[q] / mesh.perimeter;
      u.a(q, k) = amp * std::cos(s) * (1 + m.time.time(k));
      u.b(q, k) = amp * std::sin(2 * s);
    }
  return u;
}

}  // namespace

TEST_CASE("zero data gives the zero trajectory") {
  auto m = build_model(small_spec());
  auto lifted = lift_controls(*m, ControlPair::zeros(m->nodes(), m->time.steps + 1));
  ForwardTrajectory tr = forward_solve(*m, Vec::Zero(m->n()), lifted, sample_brownian(1, 0, m->time));
  CHECK(tr.c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Stokes modes decay with the implicit Euler factor") {
  ModelSpec s = small_spec();
  s.convection = false;
  auto m = build_model(s);
  auto lifted = lift_controls(*m, ControlPair::zeros(m->nodes(), m->time.steps + 1));
  Vec y0 = Vec::LinSpaced(m->n(), 1.0, 0.2);
  ForwardTrajectory tr = forward_solve(*m, y0, lifted, sample_brownian(1, 0, m->time));
  for (int i = 0; i < m->n(); ++i) {
    double exact = y0[i] * std::pow(1.0 / (1.0 + s.nu * m->time.dt * m->basis.lambda[i]), m->time.steps);
    CHECK(std::abs(tr.c(i, m->time.steps) - exact) <= 1e-14);
  }
}

TEST_CASE("energy ledger closes with boundary work") {
  auto m = build_model(small_spec());
  ControlPair u = wave(*m, 0.3);
  Vec y0 = Vec::Zero(m->n());
  y0[0] = 0.5;
  ForwardTrajectory tr = forward_solve(*m, y0, lift_controls(*m, u), sample_brownian(1, 0, m->time));
  CHECK((tr.ledger.defect - tr.ledger.boundary_work).cwiseAbs().maxCoeff() <= 1e-8);
  ControlPair ub{Mat::Zero(u.nodes(), u.time_nodes()), u.b};
  ForwardTrajectory tb = forward_solve(*m, y0, lift_controls(*m, ub), tr.path);
  CHECK(tb.ledger.defect.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("ensembles are bitwise identical across thread counts") {
  auto m = build_model(small_spec(NoiseFamily::MultiplicativeDamped));
  auto lifted = lift_controls(*m, wave(*m, 0.2));
  Vec y0 = Vec::Ones(m->n()) * 0.1;
  Ensemble a = forward_ensemble(*m, y0, lifted, 9, 12, 1);
  Ensemble b = forward_ensemble(*m, y0, lifted, 9, 12, 4);
  for (int s = 0; s < 12; ++s) CHECK((a.paths[s].c.array() == b.paths[s].c.array()).all());
  CHECK(a.paths[0].path.seed != a.paths[1].path.seed);
}

TEST_CASE("blow-up is reported with its location") {
  ModelSpec s = small_spec();
  s.ceiling = 1e-3;
  auto m = build_model(s);
  Vec y0 = Vec::Ones(m->n());
  auto lifted = lift_controls(*m, ControlPair::zeros(m->nodes(), m->time.steps + 1));
  CHECK_THROWS_AS(forward_solve(*m, y0, lifted, sample_brownian(1, 0, m->time)), BlowUpError);
}

TEST_CASE("squared Gateaux remainder scales like eps^2") {
  auto m = build_model(small_spec());
  Vec y0 = Vec::Zero(m->n());
  y0[0] = 0.5;
  std::vector<double> eps{1e-1, 5e-2, 2.5e-2, 1.25e-2};
  auto rows = gateaux_check(*m, y0, wave(*m, 0.2), wave(*m, 0.05), eps, 1, 1, 1);
  for (size_t i = 1; i < rows.size(); ++i)
    CHECK(std::log2(rows[i - 1].mean_h / rows[i].mean_h) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("weight paths are nonincreasing") {
  auto m = build_model(small_spec(NoiseFamily::MultiplicativeDamped));
  ControlPair u = wave(*m, 0.2);
  Vec y0 = Vec::Ones(m->n()) * 0.1;
  Ensemble e = forward_ensemble(*m, y0, lift_controls(*m, u), 2, 4, 1);
  WeightConstants c;
  for (const auto& tr : e.paths)
    for (auto k : {WeightKind::Xi0, WeightKind::Xi1, WeightKind::Xi2}) {
      WeightProcess w = weight_path(k, c, *m, tr, u);
      CHECK(w.xi[0] == doctest::Approx(1.0));
      for (int i = 1; i < w.xi.size(); ++i) CHECK(w.xi[i] <= w.xi[i - 1]);
    }
}
