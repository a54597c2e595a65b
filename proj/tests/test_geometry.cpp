#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nsslip/geometry.hpp"

using namespace nsslip;

TEST_CASE("boundary mesh is counterclockwise with consistent weights") {
  DomainSpec d;
  d.nx = 12;
  d.ny = 8;
  d.lx = 2.0;
  d.ly = 1.5;
  Geometry g = build_geometry(d);
  const BoundaryMesh& m = g.mesh;
  CHECK(m.size() == 2 * (d.nx + d.ny));
  CHECK(m.perimeter == doctest::Approx(2 * (d.lx + d.ly)));
  CHECK(m.weight.sum() == doctest::Approx(m.perimeter));
  CHECK(m.position[0][0] == 0.0);
  CHECK(m.position[0][1] == 0.0);
  CHECK(m.position[1][0] > 0.0);
  int corners = 0;
  for (int q = 0; q < m.size(); ++q) corners += m.corner[q];
  CHECK(corners == 4);
  for (int q = 0; q < m.size(); ++q) {
    if (m.corner[q]) continue;
    // tangent is the normal rotated counterclockwise
    CHECK(m.tangent[q][0] == doctest::Approx(-m.normal[q][1]));
    CHECK(m.tangent[q][1] == doctest::Approx(m.normal[q][0]));
  }
}

TEST_CASE("compatibility projection removes the mean flux only") {
  Geometry g = build_geometry({});
  const BoundaryMesh& m = g.mesh;
  Vec a(m.size());
  for (int q = 0; q < m.size(); ++q) a[q] = 1.0 + std::cos(2 * M_PI * m.arclength[q] / m.perimeter);
  Vec c = enforce_compatibility(a, m);
  CHECK(std::abs(boundary_integral(c, m)) < 1e-13);
  Vec c2 = enforce_compatibility(c, m);
  CHECK((c2 - c).norm() < 1e-13);
}

TEST_CASE("arclength derivative is second order for smooth periodic data") {
  double err[2];
  for (int r = 0; r < 2; ++r) {
    DomainSpec d;
    d.nx = d.ny = 16 << r;
    Geometry g = build_geometry(d);
    const BoundaryMesh& m = g.mesh;
    Vec f(m.size()), df(m.size());
    for (int q = 0; q < m.size(); ++q) {
      double w = 2 * M_PI / m.perimeter;
      f[q] = std::sin(w * m.arclength[q]);
      df[q] = w * std::cos(w * m.arclength[q]);
    }
    err[r] = (arclength_derivative(f, m) - df).cwiseAbs().maxCoeff();
  }
  CHECK(std::log2(err[0] / err[1]) == doctest::Approx(2.0).epsilon(0.1));
}
