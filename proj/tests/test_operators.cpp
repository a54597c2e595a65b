#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nsslip/operators.hpp"

using namespace nsslip;

namespace {

std::shared_ptr<const DiscreteOperators> make_ops(int nx, double alpha) {
  DomainSpec d;
  d.nx = d.ny = nx;
  Geometry g = build_geometry(d);
  return std::make_shared<const DiscreteOperators>(assemble_operators(g.grid, g.mesh, alpha, 1.0));
}

}  // namespace

TEST_CASE("divergence is minus the adjoint of the face gradient") {
  auto ops = make_ops(12, 0.5);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  Vec f = Vec::Zero(ops->n_full), p(ops->grid.num_cells());
  for (int d : ops->free_dofs)
    if (d < ops->n_xfaces + ops->n_yfaces) f[d] = n01(rng);
  for (int c = 0; c < p.size(); ++c) p[c] = n01(rng);
  double lhs = ops->grid.cell_area() * p.dot(ops->div * f);
  double rhs = -f.dot(ops->mass.cwiseProduct(ops->grad * p));
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
}

TEST_CASE("curl fields are discretely divergence free") {
  auto ops = make_ops(10, 0.5);
  Vec psi = Vec::LinSpaced(ops->n_psi, -1.0, 2.0);
  Vec u = ops->curl * psi;
  CHECK((ops->div * u).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("eigenbasis is mass orthonormal and diagonalizes the V form") {
  auto ops = make_ops(12, 0.5);
  GalerkinBasis b = stokes_eigenbasis(*ops, 10);
  Mat gram = b.me * b.e;
  CHECK((gram - Mat::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-10);
  Mat k = b.e.transpose() * (ops->vgram * b.e);
  CHECK((k - Mat(b.lambda.asDiagonal())).cwiseAbs().maxCoeff() <= 1e-10 * b.lambda.maxCoeff());
  for (int i = 1; i < b.n; ++i) CHECK(b.lambda[i] >= b.lambda[i - 1]);
  CHECK((ops->div * b.e).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("basis size is bounds checked") {
  auto ops = make_ops(8, 0.0);
  CHECK_THROWS_AS(stokes_eigenbasis(*ops, ops->n_psi + 1), std::invalid_argument);
}

TEST_CASE("first free-slip eigenvalue converges to 2 pi^2 at second order") {
  double l[3];
  for (int r = 0; r < 3; ++r) l[r] = stokes_eigenbasis(*make_ops(8 << r, 0.0), 1).lambda[0];
  double exact = 2 * M_PI * M_PI;
  double order = std::log2(std::abs(l[0] - exact) / std::abs(l[1] - exact));
  CHECK(order == doctest::Approx(2.0).epsilon(0.15));
  double rich = (4 * l[2] - l[1]) / 3;
  CHECK(std::abs(rich / exact - 1) < 5e-3);
}

TEST_CASE("lifting meets the boundary data and the Stokes equations") {
  auto ops = make_ops(16, 0.5);
  LiftingSolver solver(ops);
  const auto& m = ops->mesh;
  Vec a(m.size()), b(m.size());
  for (int q = 0; q < m.size(); ++q) {
    double s = 2 * M_PI * m.arclength[q] / m.perimeter;
    a[q] = std::cos(s) + 0.3 * std::sin(3 * s);
    b[q] = std::sin(2 * s);
  }
  LiftingField f = solver.solve(enforce_compatibility(a, m), b);
  CHECK(f.stokes_residual <= 1e-8);
  CHECK(f.normal_mismatch <= 1e-8);
  CHECK(f.slip_mismatch <= 1e-8);
  CHECK(f.divergence_l2 <= 1e-10);

  LiftingMap map = build_lifting_map(solver);
  Vec in(2 * m.size());
  in << enforce_compatibility(a, m), b;
  CHECK((map.matrix * in - f.velocity).cwiseAbs().maxCoeff() <= 1e-9 * f.velocity.cwiseAbs().maxCoeff());
}

TEST_CASE("discrete functional inequality constants are finite and positive") {
  auto ops = make_ops(12, 0.5);
  GalerkinBasis b = stokes_eigenbasis(*ops, 8);
  InequalityReport r = inequality_constants(b, *ops, 200);
  CHECK(r.li4 > 0);
  CHECK(r.trace2 > 0);
  CHECK(r.korn > 0);
  CHECK(std::isfinite(r.c_hat));
}
