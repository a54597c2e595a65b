#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nsslip/noise.hpp"

using namespace nsslip;

namespace {

GalerkinBasis small_basis() {
  DomainSpec d;
  d.nx = d.ny = 10;
  Geometry g = build_geometry(d);
  DiscreteOperators ops = assemble_operators(g.grid, g.mesh, 0.5, 0.1);
  return stokes_eigenbasis(ops, 8);
}

NoiseModel model(NoiseFamily f, double l = 1e-2) {
  NoiseSpec s;
  s.family = f;
  s.channels = 3;
  s.bound_l = l;
  return make_noise_model(s, 8);
}

}  // namespace

TEST_CASE("family names round trip") {
  for (auto f : {NoiseFamily::Zero, NoiseFamily::AdditiveDamped, NoiseFamily::MultiplicativeDamped})
    CHECK(noise_family_from_string(to_string(f)) == f);
}

TEST_CASE("ZERO family produces no forcing") {
  NoiseModel z = model(NoiseFamily::Zero);
  Vec y = Vec::Ones(8);
  Vec dw = Vec::Ones(std::max(z.m, 1));
  CHECK(noise_increment(z, y, dw.head(z.m)).norm() == 0.0);
}

TEST_CASE("multiplicative damped family satisfies the growth bounds") {
  GalerkinBasis b = small_basis();
  NoiseModel g = model(NoiseFamily::MultiplicativeDamped);
  NoiseAssumptionReport r = validate_assumptions(g, b, 300, 11);
  CHECK(r.l_est <= g.bound_l);
  CHECK(std::isfinite(r.k_est));
  CHECK((r.remainder_vanishes || r.frechet_slope >= 1.9));
  CHECK(r.adjoint_defect <= 1e-12);
}

TEST_CASE("Jacobian and its adjoint agree with each other and with differences") {
  NoiseModel g = model(NoiseFamily::MultiplicativeDamped, 0.5);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  Vec y(8), v(8);
  Mat q(8, g.m);
  for (int i = 0; i < 8; ++i) {
    y[i] = n01(rng);
    v[i] = n01(rng);
    for (int j = 0; j < g.m; ++j) q(i, j) = n01(rng);
  }
  Mat jv = apply_G_jacobian(g, 0.0, y, v);
  double lhs = (jv.array() * q.array()).sum();
  double rhs = v.dot(apply_G_jacobian_adjoint(g, 0.0, y, q));
  CHECK(std::abs(lhs - rhs) <= 1e-13 * std::abs(lhs));
  double h = 1e-6;
  Mat fd = (evaluate_G(g, 0.0, y + h * v) - evaluate_G(g, 0.0, y - h * v)) / (2 * h);
  CHECK((fd - jv).cwiseAbs().maxCoeff() <= 1e-8);
}
