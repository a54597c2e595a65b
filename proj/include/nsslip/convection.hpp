#pragma once

#include "nsslip/operators.hpp"

namespace nsslip {

// Skew-symmetrized convection form
//   b(w; z, phi) = 1/2 [((w.grad) z, phi) - ((w.grad) phi, z)] + 1/2 oint (w.n)(z.phi)
// evaluated with point operators at every face center.
class Trilinear {
 public:
  struct Points {
    Vec val, dx, dy, wx, wy;  // at face points
    Vec nn, tt;               // at boundary nodes
  };

  explicit Trilinear(const DiscreteOperators& ops);

  Points eval(const Vec& field) const;
  double form(const Points& w, const Points& z, const Points& phi) const;
  double form(const Vec& w, const Vec& z, const Vec& phi) const;
  // <residual(w, z), phi> = b(w; z, phi)
  Vec residual(const Points& w, const Points& z) const;
  // <grad_w(z, phi), w> = b(w; z, phi)
  Vec grad_w(const Points& z, const Points& phi) const;
  // <grad_z(w, phi), z> = b(w; z, phi)
  Vec grad_z(const Points& w, const Points& phi) const;

  int n_points() const { return static_cast<int>(omega_.size()); }
  const Vec& omega() const { return omega_; }
  const Vec& boundary_weight() const { return wb_; }

 private:
  SpMat val_, dx_, dy_, wx_, wy_, ntr_, ttr_;
  Vec omega_, wb_;
};

// Galerkin tensors of b in the basis, plus per-input coupling tensors of the
// lifting columns so that lifted coupling matrices are cheap matvecs.
struct ConvectionTensors {
  int n = 0;
  Mat t;        // n^2 x n, row j*n+l, col i: b(e_j; e_l, e_i)
  Mat csum;     // n^2 x inputs, vec of b(e_l; X, e_i) + b(X; e_l, e_i), entry i*n+l
  Mat c2;       // n^2 x inputs, vec of b(X; e_l, e_i)
  Mat gamma_l;  // inputs x n^2, L^T grad_w[b(w;e_j,e_l) + b(e_j;w,e_l)], col j*n+l
  std::vector<Trilinear::Points> basis_points;
};

ConvectionTensors build_convection_tensors(const Trilinear& tri, const GalerkinBasis& basis,
                                           const LiftingMap& lift);

// Quadratic part sum_{jl} c_j c_l T_{jli}.
Vec tensor_quadratic(const ConvectionTensors& ct, const Vec& c);
// sum_{jl} (c_j z_l + z_j c_l) T_{jli}
Vec tensor_jacobian(const ConvectionTensors& ct, const Vec& c, const Vec& z);
// transpose of tensor_jacobian(c, .) applied to s
Vec tensor_jacobian_t(const ConvectionTensors& ct, const Vec& c, const Vec& s);
// Reshape a stacked n^2 column (entry i*n+l) into an n x n matrix (row i).
Mat unstack(const Vec& v, int n);

}  // namespace nsslip
