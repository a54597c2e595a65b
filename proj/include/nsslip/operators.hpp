#pragma once

#include <memory>
#include <utility>

#include "nsslip/geometry.hpp"

namespace nsslip {

struct BoundaryFace {
  int face;
  int node_a;
  int node_b;
  double sign;  // stored component = sign * outward normal velocity
};

// Full velocity vector: x-faces, y-faces, then one tangential slot per
// boundary node holding y.tau there. Corner slots are pinned to zero.
struct DiscreteOperators {
  Grid grid;
  BoundaryMesh mesh;
  double alpha = 0.0;
  double nu = 1.0;

  int n_xfaces = 0, n_yfaces = 0, n_nodes = 0, n_full = 0, n_psi = 0;
  std::vector<char> is_free;
  std::vector<int> free_dofs;
  std::vector<BoundaryFace> boundary_faces;

  Vec mass;
  SpMat div;          // cells x full
  SpMat grad;         // full x cells, interior face rows only
  SpMat strain;       // strain samples x full
  Vec strain_weight;  // 2(Du,Dv) = sum w (Su)(Sv)
  SpMat grad_rows;    // all gradient components, for the H1 seminorm
  Vec grad_weight;
  SpMat normal_trace;      // nodes x full
  SpMat tangential_trace;  // nodes x full
  SpMat slip_shear;        // nodes x full, (2D(y)n).tau at non-corner nodes
  SpMat face_from_nodes;   // full x nodes, boundary normal faces from nodal a
  SpMat curl;              // full x interior vertices
  SpMat k_bulk;
  SpMat vgram;             // with boundary coefficient alpha

  int slot(int node) const { return n_xfaces + n_yfaces + node; }
  double h_min() const { return std::min(grid.hx, grid.hy); }
};

DiscreteOperators assemble_operators(const Grid& grid, const BoundaryMesh& mesh, double alpha, double nu);

// V-Gram with a per-node boundary coefficient (corner nodes carry none).
SpMat vgram_with_coeff(const DiscreteOperators& ops, const Vec& coeff);

double norm_h(const DiscreteOperators& ops, const Vec& field);
double norm_v(const DiscreteOperators& ops, const Vec& field);
double seminorm_grad(const DiscreteOperators& ops, const Vec& field);
double norm_h1(const DiscreteOperators& ops, const Vec& field);
double norm_l4(const DiscreteOperators& ops, const Vec& field);
double norm_boundary(const DiscreteOperators& ops, const Vec& field);

struct GalerkinBasis {
  int n = 0;
  Vec lambda;
  Mat e;         // full x n
  Mat me;        // n x full, e^T M
  Vec boundary_coeff;
  bool adjoint_variant = false;
};

GalerkinBasis stokes_eigenbasis(const DiscreteOperators& ops, int n, const Vec& boundary_coeff);
GalerkinBasis stokes_eigenbasis(const DiscreteOperators& ops, int n);

Vec project_to_basis(const Vec& field, const GalerkinBasis& basis);
Vec reconstruct(const Vec& coeffs, const GalerkinBasis& basis);

struct LiftingField {
  Vec velocity;
  Vec pressure;
  Vec a, b;
  double stokes_residual = 0.0;   // relative
  double normal_mismatch = 0.0;   // relative
  double slip_mismatch = 0.0;     // relative
  double divergence_l2 = 0.0;
  double c_est = 0.0;
};

class LiftingSolver {
 public:
  explicit LiftingSolver(std::shared_ptr<const DiscreteOperators> ops);
  LiftingField solve(const Vec& a, const Vec& b, double compat_tol = 1e-10) const;
  // Velocity only, a is projected onto the compatible subspace first.
  Vec lift_velocity(const Vec& a, const Vec& b) const;
  const DiscreteOperators& ops() const { return *ops_; }

 private:
  std::pair<Vec, Vec> solve_raw(const Vec& a, const Vec& b) const;
  std::shared_ptr<const DiscreteOperators> ops_;
  std::vector<int> row_of_dof_;
  int n_unknowns_ = 0;
  std::shared_ptr<Eigen::SparseLU<SpMat>> lu_;
};

LiftingField solve_lifting(const Vec& a, const Vec& b, const DiscreteOperators& ops);

// Dense lifting operator on the stacked input (a_0..a_{P-1}, b_0..b_{P-1}).
struct LiftingMap {
  Mat matrix;  // full x 2P
  Vec input_weight;  // boundary weights repeated for the a and b blocks
  int n_nodes = 0;
};

LiftingMap build_lifting_map(const LiftingSolver& solver);

struct InequalityReport {
  double li4 = 0.0;     // ||v||_4 / (||v||^{1/2} ||grad v||^{1/2})
  double trace2 = 0.0;  // ||v||_{L2(G)} / (||v||^{1/2} ||grad v||^{1/2})
  double korn = 0.0;    // ||v||_{H1} / ||v||_V
  double c_hat = 0.0;   // ||v||^4 / (||v||^2 ||v||_V^2)
  int samples = 0;
};

InequalityReport inequality_constants(const GalerkinBasis& basis, const DiscreteOperators& ops,
                                      int samples = 1000, std::uint64_t seed = 2024);

}  // namespace nsslip
