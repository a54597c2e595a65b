#include "nsslip/convection.hpp"

namespace nsslip {

namespace {

using Stencil = std::vector<std::pair<int, double>>;

Stencil scaled(Stencil s, double f) {
  for (auto& e : s) e.second *= f;
  return s;
}

Stencil join(std::initializer_list<Stencil> parts) {
  Stencil out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

Trilinear::Trilinear(const DiscreteOperators& ops) {
  const Grid& g = ops.grid;
  const BoundaryMesh& m = ops.mesh;
  const int nx = g.nx, ny = g.ny;
  const double hx = g.hx, hy = g.hy;
  const int np = ops.n_xfaces + ops.n_yfaces, nfull = ops.n_full;
  auto U = [&](int i, int j) { return g.xface(i, j); };
  auto V = [&](int i, int j) { return g.yface(i, j); };
  // Corner values copy the adjacent boundary face.
  auto ubd = [&](int i, int jb) -> Stencil {
    if (i > 0 && i < nx) return {{ops.slot(m.node_at(g, i, jb)), jb == 0 ? 1.0 : -1.0}};
    return {{U(i, jb == 0 ? 0 : ny - 1), 1.0}};
  };
  auto vbd = [&](int ib, int j) -> Stencil {
    if (j > 0 && j < ny) return {{ops.slot(m.node_at(g, ib, j)), ib == 0 ? -1.0 : 1.0}};
    return {{V(ib == 0 ? 0 : nx - 1, j), 1.0}};
  };

  Triplets tv, tdx, tdy, twx, twy;
  auto put = [](Triplets& t, int row, const Stencil& s) {
    for (auto [d, c] : s) t.emplace_back(row, d, c);
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      int p = U(i, j);
      tv.emplace_back(p, p, 1.0);
      twx.emplace_back(p, p, 1.0);
      if (i == 0)
        put(tdx, p, {{U(1, j), 1.0 / hx}, {U(0, j), -1.0 / hx}});
      else if (i == nx)
        put(tdx, p, {{U(nx, j), 1.0 / hx}, {U(nx - 1, j), -1.0 / hx}});
      else
        put(tdx, p, {{U(i + 1, j), 0.5 / hx}, {U(i - 1, j), -0.5 / hx}});
      if (j == 0)
        put(tdy, p, join({{{U(i, 1), 1.0 / (1.5 * hy)}}, scaled(ubd(i, 0), -1.0 / (1.5 * hy))}));
      else if (j == ny - 1)
        put(tdy, p, join({scaled(ubd(i, ny), 1.0 / (1.5 * hy)), {{U(i, ny - 2), -1.0 / (1.5 * hy)}}}));
      else
        put(tdy, p, {{U(i, j + 1), 0.5 / hy}, {U(i, j - 1), -0.5 / hy}});
      if (i == 0 || i == nx)
        put(twy, p, join({scaled(vbd(i, j), 0.5), scaled(vbd(i, j + 1), 0.5)}));
      else
        put(twy, p, {{V(i - 1, j), 0.25}, {V(i, j), 0.25}, {V(i - 1, j + 1), 0.25}, {V(i, j + 1), 0.25}});
    }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int p = V(i, j);
      tv.emplace_back(p, p, 1.0);
      twy.emplace_back(p, p, 1.0);
      if (j == 0)
        put(tdy, p, {{V(i, 1), 1.0 / hy}, {V(i, 0), -1.0 / hy}});
      else if (j == ny)
        put(tdy, p, {{V(i, ny), 1.0 / hy}, {V(i, ny - 1), -1.0 / hy}});
      else
        put(tdy, p, {{V(i, j + 1), 0.5 / hy}, {V(i, j - 1), -0.5 / hy}});
      if (i == 0)
        put(tdx, p, join({{{V(1, j), 1.0 / (1.5 * hx)}}, scaled(vbd(0, j), -1.0 / (1.5 * hx))}));
      else if (i == nx - 1)
        put(tdx, p, join({scaled(vbd(nx, j), 1.0 / (1.5 * hx)), {{V(nx - 2, j), -1.0 / (1.5 * hx)}}}));
      else
        put(tdx, p, {{V(i + 1, j), 0.5 / hx}, {V(i - 1, j), -0.5 / hx}});
      if (j == 0 || j == ny)
        put(twx, p, join({scaled(ubd(i, j), 0.5), scaled(ubd(i + 1, j), 0.5)}));
      else
        put(twx, p, {{U(i, j - 1), 0.25}, {U(i + 1, j - 1), 0.25}, {U(i, j), 0.25}, {U(i + 1, j), 0.25}});
    }
  auto mk = [&](const Triplets& t) {
    SpMat a(np, nfull);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();
    return a;
  };
  val_ = mk(tv);
  dx_ = mk(tdx);
  dy_ = mk(tdy);
  wx_ = mk(twx);
  wy_ = mk(twy);
  ntr_ = ops.normal_trace;
  ttr_ = ops.tangential_trace;
  omega_ = ops.mass.head(np);
  wb_ = m.weight;
  for (int k = 0; k < m.size(); ++k)
    if (m.corner[k]) wb_[k] = 0.0;
}

Trilinear::Points Trilinear::eval(const Vec& f) const {
  Points p;
  p.val = val_ * f;
  p.dx = dx_ * f;
  p.dy = dy_ * f;
  p.wx = wx_ * f;
  p.wy = wy_ * f;
  p.nn = ntr_ * f;
  p.tt = ttr_ * f;
  return p;
}

double Trilinear::form(const Points& w, const Points& z, const Points& phi) const {
  double a = 0.0, b = 0.0, c = 0.0;
  const Eigen::Index np = omega_.size();
  for (Eigen::Index p = 0; p < np; ++p) {
    a += omega_[p] * phi.val[p] * (w.wx[p] * z.dx[p] + w.wy[p] * z.dy[p]);
    b += omega_[p] * z.val[p] * (w.wx[p] * phi.dx[p] + w.wy[p] * phi.dy[p]);
  }
  for (Eigen::Index k = 0; k < wb_.size(); ++k)
    c += wb_[k] * w.nn[k] * (z.nn[k] * phi.nn[k] + z.tt[k] * phi.tt[k]);
  return 0.5 * (a - b) + 0.5 * c;
}

double Trilinear::form(const Vec& w, const Vec& z, const Vec& phi) const {
  return form(eval(w), eval(z), eval(phi));
}

Vec Trilinear::residual(const Points& w, const Points& z) const {
  Vec adv = omega_.cwiseProduct(w.wx.cwiseProduct(z.dx) + w.wy.cwiseProduct(z.dy));
  Vec zw = omega_.cwiseProduct(z.val);
  Vec r = 0.5 * (val_.transpose() * adv);
  r -= 0.5 * (dx_.transpose() * zw.cwiseProduct(w.wx));
  r -= 0.5 * (dy_.transpose() * zw.cwiseProduct(w.wy));
  Vec wn = wb_.cwiseProduct(w.nn);
  r += 0.5 * (ntr_.transpose() * wn.cwiseProduct(z.nn));
  r += 0.5 * (ttr_.transpose() * wn.cwiseProduct(z.tt));
  return r;
}

Vec Trilinear::grad_w(const Points& z, const Points& phi) const {
  Vec pv = omega_.cwiseProduct(phi.val), zv = omega_.cwiseProduct(z.val);
  Vec r = 0.5 * (wx_.transpose() * (pv.cwiseProduct(z.dx) - zv.cwiseProduct(phi.dx)));
  r += 0.5 * (wy_.transpose() * (pv.cwiseProduct(z.dy) - zv.cwiseProduct(phi.dy)));
  r += 0.5 * (ntr_.transpose() * wb_.cwiseProduct(z.nn.cwiseProduct(phi.nn) + z.tt.cwiseProduct(phi.tt)));
  return r;
}

Vec Trilinear::grad_z(const Points& w, const Points& phi) const {
  Vec pv = omega_.cwiseProduct(phi.val);
  Vec r = 0.5 * (dx_.transpose() * pv.cwiseProduct(w.wx));
  r += 0.5 * (dy_.transpose() * pv.cwiseProduct(w.wy));
  r -= 0.5 * (val_.transpose() * omega_.cwiseProduct(w.wx.cwiseProduct(phi.dx) + w.wy.cwiseProduct(phi.dy)));
  Vec wn = wb_.cwiseProduct(w.nn);
  r += 0.5 * (ntr_.transpose() * wn.cwiseProduct(phi.nn));
  r += 0.5 * (ttr_.transpose() * wn.cwiseProduct(phi.tt));
  return r;
}

namespace {

struct PointMatrices {
  Mat val, dx, dy, wx, wy, nn, tt;  // columns per basis vector
};

PointMatrices stack_points(const std::vector<Trilinear::Points>& pts) {
  const int n = static_cast<int>(pts.size());
  PointMatrices pm;
  const auto np = pts[0].val.size(), nb = pts[0].nn.size();
  pm.val.resize(np, n);
  pm.dx.resize(np, n);
  pm.dy.resize(np, n);
  pm.wx.resize(np, n);
  pm.wy.resize(np, n);
  pm.nn.resize(nb, n);
  pm.tt.resize(nb, n);
  for (int k = 0; k < n; ++k) {
    pm.val.col(k) = pts[k].val;
    pm.dx.col(k) = pts[k].dx;
    pm.dy.col(k) = pts[k].dy;
    pm.wx.col(k) = pts[k].wx;
    pm.wy.col(k) = pts[k].wy;
    pm.nn.col(k) = pts[k].nn;
    pm.tt.col(k) = pts[k].tt;
  }
  return pm;
}

// [i][l] = b(X; e_l, e_i)
Mat advected_by(const PointMatrices& pm, const Trilinear::Points& x, const Vec& omega, const Vec& wb) {
  Mat a = pm.val.transpose() * (omega.cwiseProduct(x.wx)).asDiagonal() * pm.dx;
  a.noalias() += pm.val.transpose() * (omega.cwiseProduct(x.wy)).asDiagonal() * pm.dy;
  Mat c = pm.nn.transpose() * wb.cwiseProduct(x.nn).asDiagonal() * pm.nn;
  c.noalias() += pm.tt.transpose() * wb.cwiseProduct(x.nn).asDiagonal() * pm.tt;
  return 0.5 * (a - a.transpose()) + 0.5 * c;
}

// [i][l] = b(e_l; X, e_i)
Mat advecting(const PointMatrices& pm, const Trilinear::Points& x, const Vec& omega, const Vec& wb) {
  Mat a = pm.val.transpose() * (omega.cwiseProduct(x.dx)).asDiagonal() * pm.wx;
  a.noalias() += pm.val.transpose() * (omega.cwiseProduct(x.dy)).asDiagonal() * pm.wy;
  Mat b = pm.dx.transpose() * (omega.cwiseProduct(x.val)).asDiagonal() * pm.wx;
  b.noalias() += pm.dy.transpose() * (omega.cwiseProduct(x.val)).asDiagonal() * pm.wy;
  Mat c = pm.nn.transpose() * wb.cwiseProduct(x.nn).asDiagonal() * pm.nn;
  c.noalias() += pm.tt.transpose() * wb.cwiseProduct(x.tt).asDiagonal() * pm.nn;
  return 0.5 * (a - b) + 0.5 * c;
}

Vec stack(const Mat& m) {
  const auto n = m.rows();
  Vec v(n * m.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index l = 0; l < m.cols(); ++l) v[i * m.cols() + l] = m(i, l);
  return v;
}

}  // namespace

ConvectionTensors build_convection_tensors(const Trilinear& tri, const GalerkinBasis& basis,
                                           const LiftingMap& lift) {
  ConvectionTensors ct;
  const int n = basis.n;
  ct.n = n;
  for (int k = 0; k < n; ++k) ct.basis_points.push_back(tri.eval(basis.e.col(k)));
  PointMatrices pm = stack_points(ct.basis_points);
  const Vec omega = tri.omega();
  const Vec wb = tri.boundary_weight();

  ct.t.resize(n * n, n);
  for (int j = 0; j < n; ++j) {
    Mat m = advected_by(pm, ct.basis_points[j], omega, wb);
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i) ct.t(j * n + l, i) = m(i, l);
  }

  const auto inputs = lift.matrix.cols();
  ct.csum.resize(n * n, inputs);
  ct.c2.resize(n * n, inputs);
  for (Eigen::Index in = 0; in < inputs; ++in) {
    Trilinear::Points x = tri.eval(lift.matrix.col(in));
    Mat m2 = advected_by(pm, x, omega, wb);
    Mat m1 = advecting(pm, x, omega, wb);
    ct.c2.col(in) = stack(m2);
    ct.csum.col(in) = stack(m1 + m2);
  }

  Mat gamma(lift.matrix.rows(), n * n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l)
      gamma.col(j * n + l) = tri.grad_w(ct.basis_points[j], ct.basis_points[l]) +
                             tri.grad_z(ct.basis_points[j], ct.basis_points[l]);
  ct.gamma_l = lift.matrix.transpose() * gamma;
  return ct;
}

Vec tensor_quadratic(const ConvectionTensors& ct, const Vec& c) {
  const int n = ct.n;
  Vec cc(n * n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) cc[j * n + l] = c[j] * c[l];
  return ct.t.transpose() * cc;
}

Vec tensor_jacobian(const ConvectionTensors& ct, const Vec& c, const Vec& z) {
  const int n = ct.n;
  Vec cz(n * n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) cz[j * n + l] = c[j] * z[l] + z[j] * c[l];
  return ct.t.transpose() * cz;
}

Vec tensor_jacobian_t(const ConvectionTensors& ct, const Vec& c, const Vec& s) {
  const int n = ct.n;
  Vec q = ct.t * s;
  Vec out = Vec::Zero(n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      out[l] += c[j] * q[j * n + l];
      out[j] += c[l] * q[j * n + l];
    }
  return out;
}

Mat unstack(const Vec& v, int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) m(i, l) = v[i * n + l];
  return m;
}

}  // namespace nsslip
