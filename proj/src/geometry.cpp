#include "nsslip/geometry.hpp"

#include <cmath>

namespace nsslip {

namespace {

Point edge_normal(Edge e) {
  switch (e) {
    case Edge::Bottom: return {0.0, -1.0};
    case Edge::Right: return {1.0, 0.0};
    case Edge::Top: return {0.0, 1.0};
    case Edge::Left: return {-1.0, 0.0};
  }
  return {0.0, 0.0};
}

}  // namespace

Geometry build_geometry(const DomainSpec& spec) {
  if (spec.nx < 8 || spec.ny < 8)
    throw std::invalid_argument("grid too coarse for the slip stencil: nx and ny must be >= 8");
  if (!(spec.lx > 0.0) || !(spec.ly > 0.0))
    throw std::invalid_argument("side lengths must be positive");

  Geometry geo;
  Grid& g = geo.grid;
  g.nx = spec.nx;
  g.ny = spec.ny;
  g.lx = spec.lx;
  g.ly = spec.ly;
  g.hx = spec.lx / spec.nx;
  g.hy = spec.ly / spec.ny;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) g.cell_centers.push_back({(i + 0.5) * g.hx, (j + 0.5) * g.hy});
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) g.xface_centers.push_back({i * g.hx, (j + 0.5) * g.hy});
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) g.yface_centers.push_back({(i + 0.5) * g.hx, j * g.hy});

  BoundaryMesh& m = geo.mesh;
  std::vector<std::pair<int, int>> verts;
  std::vector<Edge> edges;
  for (int i = 0; i < g.nx; ++i) verts.push_back({i, 0}), edges.push_back(Edge::Bottom);
  for (int j = 0; j < g.ny; ++j) verts.push_back({g.nx, j}), edges.push_back(Edge::Right);
  for (int i = g.nx; i > 0; --i) verts.push_back({i, g.ny}), edges.push_back(Edge::Top);
  for (int j = g.ny; j > 0; --j) verts.push_back({0, j}), edges.push_back(Edge::Left);

  const int count = static_cast<int>(verts.size());
  m.node_of_vertex.assign((g.nx + 1) * (g.ny + 1), -1);
  m.weight.resize(count);
  m.arclength.resize(count);
  double s = 0.0;
  for (int k = 0; k < count; ++k) {
    auto [i, j] = verts[k];
    m.vi.push_back(i);
    m.vj.push_back(j);
    m.position.push_back({i * g.hx, j * g.hy});
    m.node_of_vertex[g.vertex(i, j)] = k;
    bool is_corner = (i == 0 || i == g.nx) && (j == 0 || j == g.ny);
    m.corner.push_back(is_corner ? 1 : 0);
    m.edge.push_back(edges[k]);
    Point n = edge_normal(edges[k]);
    if (is_corner) {
      Edge prev = edges[(k + count - 1) % count];
      Point n2 = edge_normal(prev);
      double nn = std::hypot(n[0] + n2[0], n[1] + n2[1]);
      n = {(n[0] + n2[0]) / nn, (n[1] + n2[1]) / nn};
    }
    m.normal.push_back(n);
    m.tangent.push_back({-n[1], n[0]});
    bool horizontal = edges[k] == Edge::Bottom || edges[k] == Edge::Top;
    m.weight[k] = is_corner ? 0.5 * (g.hx + g.hy) : (horizontal ? g.hx : g.hy);
    m.arclength[k] = s;
    s += horizontal ? g.hx : g.hy;
  }
  m.perimeter = s;
  return geo;
}

double boundary_integral(const Vec& values, const BoundaryMesh& mesh) {
  if (values.size() != mesh.size())
    throw std::invalid_argument("boundary values length does not match the boundary mesh");
  CompensatedSum sum;
  for (int k = 0; k < mesh.size(); ++k) sum.add(values[k] * mesh.weight[k]);
  return sum.value();
}

Vec enforce_compatibility(const Vec& a, const BoundaryMesh& mesh) {
  double mean = boundary_integral(a, mesh) / mesh.weight.sum();
  Vec out = a.array() - mean;
  // A second pass removes the rounding residue of the first.
  double rest = boundary_integral(out, mesh) / mesh.weight.sum();
  out.array() -= rest;
  return out;
}

Vec arclength_derivative(const Vec& values, const BoundaryMesh& mesh) {
  const int n = mesh.size();
  if (values.size() != n)
    throw std::invalid_argument("boundary values length does not match the boundary mesh");
  Vec d(n);
  for (int k = 0; k < n; ++k) {
    int kp = (k + 1) % n, km = (k + n - 1) % n;
    double sp = mesh.arclength[kp] + (kp == 0 ? mesh.perimeter : 0.0);
    double sm = mesh.arclength[km] - (km == n - 1 ? mesh.perimeter : 0.0);
    d[k] = (values[kp] - values[km]) / (sp - sm);
  }
  return d;
}

double boundary_l2(const Vec& values, const BoundaryMesh& mesh) {
  return std::sqrt(boundary_integral(values.array().square().matrix(), mesh));
}

double surrogate_norm(const Vec& a, const Vec& b, const BoundaryMesh& mesh) {
  return boundary_l2(a, mesh) + boundary_l2(arclength_derivative(a, mesh), mesh) + boundary_l2(b, mesh);
}

}  // namespace nsslip
