#pragma once

#include <array>
#include <vector>

#include "nsslip/common.hpp"

namespace nsslip {

struct DomainSpec {
  int nx = 32;
  int ny = 32;
  double lx = 1.0;
  double ly = 1.0;
};

using Point = std::array<double, 2>;

// MAC layout: u on x-faces (i*hx, (j+1/2)*hy), v on y-faces ((i+1/2)*hx, j*hy),
// pressure at cell centers.
struct Grid {
  int nx = 0, ny = 0;
  double lx = 0, ly = 0, hx = 0, hy = 0;
  std::vector<Point> cell_centers;
  std::vector<Point> xface_centers;
  std::vector<Point> yface_centers;

  int num_cells() const { return nx * ny; }
  int num_xfaces() const { return (nx + 1) * ny; }
  int num_yfaces() const { return nx * (ny + 1); }
  double cell_area() const { return hx * hy; }
  int cell(int i, int j) const { return j * nx + i; }
  int xface(int i, int j) const { return j * (nx + 1) + i; }
  int yface(int i, int j) const { return num_xfaces() + j * nx + i; }
  int vertex(int i, int j) const { return j * (nx + 1) + i; }
};

enum class Edge { Bottom = 0, Right = 1, Top = 2, Left = 3 };

// Boundary vertices ordered counterclockwise from (0,0).
struct BoundaryMesh {
  std::vector<Point> position;
  std::vector<int> vi, vj;
  std::vector<Edge> edge;
  std::vector<Point> normal;
  std::vector<Point> tangent;
  std::vector<char> corner;
  Vec weight;
  Vec arclength;
  double perimeter = 0.0;
  std::vector<int> node_of_vertex;

  int size() const { return static_cast<int>(position.size()); }
  int node_at(const Grid& g, int i, int j) const { return node_of_vertex[g.vertex(i, j)]; }
};

struct Geometry {
  Grid grid;
  BoundaryMesh mesh;
};

Geometry build_geometry(const DomainSpec& spec);

double boundary_integral(const Vec& values, const BoundaryMesh& mesh);

Vec enforce_compatibility(const Vec& a, const BoundaryMesh& mesh);

// Centered periodic difference along arclength.
Vec arclength_derivative(const Vec& values, const BoundaryMesh& mesh);

double boundary_l2(const Vec& values, const BoundaryMesh& mesh);

// ||a|| + ||d_s a|| + ||b|| on the boundary.
double surrogate_norm(const Vec& a, const Vec& b, const BoundaryMesh& mesh);

}  // namespace nsslip
