#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support.hpp"

using namespace nsslip;
using namespace nsslip::testing;

namespace {

ControlPair random_pair(const Model& m, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  ControlPair u = ControlPair::zeros(m.nodes(), m.time.steps + 1);
  for (int k = 0; k < u.time_nodes(); ++k)
    for (int q = 0; q < u.nodes(); ++q) {
      u.a(q, k) = scale * n01(rng);
      u.b(q, k) = scale * n01(rng);
    }
  return u;
}

}  // namespace

TEST_CASE("projection is feasible, idempotent and fixes feasible inputs") {
  auto m = build_model(oracle_spec());
  const auto& mesh = m->ops->mesh;
  AdmissibleSet set{0.5, 0.0};
  ControlPair u = random_pair(*m, 1, 2.0);
  ControlPair p = project_admissible(u, set, mesh);
  for (int k = 0; k < p.time_nodes(); ++k) {
    CHECK(std::abs(boundary_integral(p.a.col(k), mesh)) < 1e-12);
    CHECK(p.a.col(k).cwiseAbs().maxCoeff() <= 0.5 + 1e-12);
    CHECK(p.b.col(k).cwiseAbs().maxCoeff() <= 0.5 + 1e-12);
  }
  ControlPair pp = project_admissible(p, set, mesh);
  CHECK((pp - p).a.cwiseAbs().maxCoeff() < 1e-12);
  CHECK((pp - p).b.cwiseAbs().maxCoeff() < 1e-12);

  AdmissibleSet capped{0.5, 0.3};
  ControlPair c = project_admissible(u, capped, mesh);
  for (int k = 0; k < c.time_nodes(); ++k) CHECK(c.surrogate_norm_at(k, mesh) <= 0.3 + 1e-12);
}

TEST_CASE("deterministic gradient matches central differences of the discrete cost") {
  Problem pb;
  pb.model = build_model(oracle_spec());
  const Model& m = *pb.model;
  pb.y0 = oracle_y0(m.n());
  pb.target = smooth_target(m);
  ControlPair u = project_admissible(shape(m, 0.4, 0.3, 1, 2), pb.set, m.ops->mesh);
  Evaluation e = evaluate(pb, u);
  GradientPair g = gradient(pb, e).gradient;
  for (int d = 0; d < 10; ++d) {
    ControlPair f = random_pair(m, 100 + d, 1.0);
    for (int k = 0; k < f.time_nodes(); ++k) f.a.col(k) = enforce_compatibility(f.a.col(k), m.ops->mesh);
    double h = 1e-5;
    double fd = (evaluate(pb, u + f * h).cost.total - evaluate(pb, u + f * (-h)).cost.total) / (2 * h);
    double an = gamma_inner(m, g.g, f);
    CHECK(std::abs(fd - an) <= 1e-6 * std::abs(fd));
  }
}

TEST_CASE("PGD reaches the normal-equations minimizer of the quadratic surrogate") {
  ModelSpec s = oracle_spec();
  s.convection = false;
  Problem pb;
  pb.model = build_model(s);
  const Model& m = *pb.model;
  pb.y0 = Vec::Zero(m.n());
  pb.y0[0] = 0.5;
  pb.target = smooth_target(m);
  pb.set = {1e3, 0.0};
  ControlPair ne = normal_equations_solution(pb);
  PgdOptions o;
  o.max_iters = 500;
  o.tol_g = 1e-9;
  PgdResult r = optimize_pgd(pb, ControlPair::zeros(m.nodes(), m.time.steps + 1), o);
  CHECK(r.status == "converged");
  CHECK(r.trace.back().pg_norm <= 1e-6);
  CHECK(gamma_norm(m, r.controls - ne) <= 1e-6 * std::max(1.0, gamma_norm(m, ne)));
  for (size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].j <= r.trace[i - 1].j);
  OptimalityReport op = optimality_residual(m, r.controls, r.gradient, pb.set, pb.cost, 32, 4);
  CHECK(op.normalized >= -1e-6);
}

TEST_CASE("gamma inner product is bilinear and symmetric") {
  auto m = build_model(oracle_spec());
  ControlPair u = random_pair(*m, 1, 1.0), v = random_pair(*m, 2, 1.0);
  CHECK(gamma_inner(*m, u, v) == doctest::Approx(gamma_inner(*m, v, u)));
  CHECK(gamma_inner(*m, u * 2.0, v) == doctest::Approx(2 * gamma_inner(*m, u, v)));
  CHECK(gamma_norm(*m, u) == doctest::Approx(std::sqrt(gamma_inner(*m, u, u))));
}
