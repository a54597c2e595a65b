#include "nsslip/operators.hpp"

#include <cmath>
#include <random>

namespace nsslip {

namespace {

using Stencil = std::vector<std::pair<int, double>>;

struct Builder {
  const Grid& g;
  const BoundaryMesh& m;
  int nx, ny;
  double hx, hy;
  int slot0;

  Builder(const Grid& grid, const BoundaryMesh& mesh)
      : g(grid), m(mesh), nx(grid.nx), ny(grid.ny), hx(grid.hx), hy(grid.hy),
        slot0(grid.num_xfaces() + grid.num_yfaces()) {}

  int U(int i, int j) const { return g.xface(i, j); }
  int V(int i, int j) const { return g.yface(i, j); }

  // u at the boundary vertex (i, jb), jb in {0, ny}.
  Stencil u_bdry(int i, int jb) const {
    if (i > 0 && i < nx) return {{slot0 + m.node_at(g, i, jb), jb == 0 ? 1.0 : -1.0}};
    return {{U(i, jb == 0 ? 0 : ny - 1), 1.0}};
  }
  // v at the boundary vertex (ib, j), ib in {0, nx}.
  Stencil v_bdry(int ib, int j) const {
    if (j > 0 && j < ny) return {{slot0 + m.node_at(g, ib, j), ib == 0 ? -1.0 : 1.0}};
    return {{V(ib == 0 ? 0 : nx - 1, j), 1.0}};
  }

  Stencil u_y(int i, int j) const {
    if (j > 0 && j < ny) return {{U(i, j), 1.0 / hy}, {U(i, j - 1), -1.0 / hy}};
    Stencil s;
    if (j == 0) {
      s.push_back({U(i, 0), 2.0 / hy});
      for (auto [d, c] : u_bdry(i, 0)) s.push_back({d, -2.0 / hy * c});
    } else {
      s.push_back({U(i, ny - 1), -2.0 / hy});
      for (auto [d, c] : u_bdry(i, ny)) s.push_back({d, 2.0 / hy * c});
    }
    return s;
  }
  Stencil v_x(int i, int j) const {
    if (i > 0 && i < nx) return {{V(i, j), 1.0 / hx}, {V(i - 1, j), -1.0 / hx}};
    Stencil s;
    if (i == 0) {
      s.push_back({V(0, j), 2.0 / hx});
      for (auto [d, c] : v_bdry(0, j)) s.push_back({d, -2.0 / hx * c});
    } else {
      s.push_back({V(nx - 1, j), -2.0 / hx});
      for (auto [d, c] : v_bdry(nx, j)) s.push_back({d, 2.0 / hx * c});
    }
    return s;
  }
  bool is_corner(int i, int j) const { return (i == 0 || i == nx) && (j == 0 || j == ny); }
  bool on_boundary(int i, int j) const { return i == 0 || i == nx || j == 0 || j == ny; }
};

void push_row(Triplets& t, int row, const Stencil& s, double scale = 1.0) {
  for (auto [d, c] : s) t.emplace_back(row, d, c * scale);
}

SpMat from_triplets(int rows, int cols, const Triplets& t) {
  SpMat a(rows, cols);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

}  // namespace

DiscreteOperators assemble_operators(const Grid& grid, const BoundaryMesh& mesh, double alpha, double nu) {
  if (!(grid.hx > 0.0) || !(grid.hy > 0.0)) throw std::invalid_argument("zero cell area");
  if (alpha < 0.0) throw std::invalid_argument("slip coefficient must be nonnegative");
  if (!(nu > 0.0)) throw std::invalid_argument("viscosity must be positive");

  DiscreteOperators ops;
  ops.grid = grid;
  ops.mesh = mesh;
  ops.alpha = alpha;
  ops.nu = nu;
  Builder b(grid, mesh);
  const int nx = grid.nx, ny = grid.ny;
  const double hx = grid.hx, hy = grid.hy, area = grid.cell_area();
  ops.n_xfaces = grid.num_xfaces();
  ops.n_yfaces = grid.num_yfaces();
  ops.n_nodes = mesh.size();
  ops.n_full = ops.n_xfaces + ops.n_yfaces + ops.n_nodes;
  ops.n_psi = (nx - 1) * (ny - 1);
  const int nfull = ops.n_full, ncells = grid.num_cells();

  ops.is_free.assign(nfull, 0);
  ops.mass = Vec::Zero(nfull);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      bool inner = i > 0 && i < nx;
      ops.is_free[b.U(i, j)] = inner;
      ops.mass[b.U(i, j)] = inner ? area : 0.5 * area;
    }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      bool inner = j > 0 && j < ny;
      ops.is_free[b.V(i, j)] = inner;
      ops.mass[b.V(i, j)] = inner ? area : 0.5 * area;
    }
  for (int k = 0; k < ops.n_nodes; ++k) ops.is_free[ops.slot(k)] = !mesh.corner[k];
  for (int d = 0; d < nfull; ++d)
    if (ops.is_free[d]) ops.free_dofs.push_back(d);

  for (int i = 0; i < nx; ++i) {
    ops.boundary_faces.push_back({b.V(i, 0), mesh.node_at(grid, i, 0), mesh.node_at(grid, i + 1, 0), -1.0});
    ops.boundary_faces.push_back({b.V(i, ny), mesh.node_at(grid, i, ny), mesh.node_at(grid, i + 1, ny), 1.0});
  }
  for (int j = 0; j < ny; ++j) {
    ops.boundary_faces.push_back({b.U(0, j), mesh.node_at(grid, 0, j), mesh.node_at(grid, 0, j + 1), -1.0});
    ops.boundary_faces.push_back({b.U(nx, j), mesh.node_at(grid, nx, j), mesh.node_at(grid, nx, j + 1), 1.0});
  }

  Triplets t;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int c = grid.cell(i, j);
      t.emplace_back(c, b.U(i + 1, j), 1.0 / hx);
      t.emplace_back(c, b.U(i, j), -1.0 / hx);
      t.emplace_back(c, b.V(i, j + 1), 1.0 / hy);
      t.emplace_back(c, b.V(i, j), -1.0 / hy);
    }
  ops.div = from_triplets(ncells, nfull, t);

  t.clear();
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      t.emplace_back(b.U(i, j), grid.cell(i, j), 1.0 / hx);
      t.emplace_back(b.U(i, j), grid.cell(i - 1, j), -1.0 / hx);
    }
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      t.emplace_back(b.V(i, j), grid.cell(i, j), 1.0 / hy);
      t.emplace_back(b.V(i, j), grid.cell(i, j - 1), -1.0 / hy);
    }
  ops.grad = from_triplets(nfull, ncells, t);

  Triplets ts, tg, tslip;
  std::vector<double> sw, gw;
  int srow = 0, grow = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Stencil ux{{b.U(i + 1, j), 1.0 / hx}, {b.U(i, j), -1.0 / hx}};
      Stencil vy{{b.V(i, j + 1), 1.0 / hy}, {b.V(i, j), -1.0 / hy}};
      push_row(ts, srow++, ux);
      sw.push_back(2.0 * area);
      push_row(ts, srow++, vy);
      sw.push_back(2.0 * area);
      push_row(tg, grow++, ux);
      gw.push_back(area);
      push_row(tg, grow++, vy);
      gw.push_back(area);
    }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      if (b.is_corner(i, j)) continue;
      double w = b.on_boundary(i, j) ? 0.5 * area : area;
      Stencil uy = b.u_y(i, j), vx = b.v_x(i, j);
      push_row(ts, srow, uy);
      push_row(ts, srow, vx);
      sw.push_back(w);
      ++srow;
      push_row(tg, grow++, uy);
      gw.push_back(w);
      push_row(tg, grow++, vx);
      gw.push_back(w);
      if (b.on_boundary(i, j)) {
        int k = mesh.node_at(grid, i, j);
        double sigma = (j == 0 || j == ny) ? -1.0 : 1.0;
        push_row(tslip, k, uy, sigma);
        push_row(tslip, k, vx, sigma);
      }
    }
  ops.strain = from_triplets(srow, nfull, ts);
  ops.strain_weight = Eigen::Map<Vec>(sw.data(), static_cast<Eigen::Index>(sw.size()));
  ops.grad_rows = from_triplets(grow, nfull, tg);
  ops.grad_weight = Eigen::Map<Vec>(gw.data(), static_cast<Eigen::Index>(gw.size()));
  ops.slip_shear = from_triplets(ops.n_nodes, nfull, tslip);

  Triplets tn, tt, tf;
  for (const auto& f : ops.boundary_faces) {
    if (!mesh.corner[f.node_a]) tn.emplace_back(f.node_a, f.face, 0.5 * f.sign);
    if (!mesh.corner[f.node_b]) tn.emplace_back(f.node_b, f.face, 0.5 * f.sign);
    tf.emplace_back(f.face, f.node_a, 0.5 * f.sign);
    tf.emplace_back(f.face, f.node_b, 0.5 * f.sign);
  }
  for (int k = 0; k < ops.n_nodes; ++k)
    if (!mesh.corner[k]) tt.emplace_back(k, ops.slot(k), 1.0);
  ops.normal_trace = from_triplets(ops.n_nodes, nfull, tn);
  ops.tangential_trace = from_triplets(ops.n_nodes, nfull, tt);
  ops.face_from_nodes = from_triplets(nfull, ops.n_nodes, tf);

  t.clear();
  auto psi = [&](int i, int j) { return (j - 1) * (nx - 1) + (i - 1); };
  auto inner_vertex = [&](int i, int j) { return i > 0 && i < nx && j > 0 && j < ny; };
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      if (inner_vertex(i, j + 1)) t.emplace_back(b.U(i, j), psi(i, j + 1), 1.0 / hy);
      if (inner_vertex(i, j)) t.emplace_back(b.U(i, j), psi(i, j), -1.0 / hy);
    }
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (inner_vertex(i + 1, j)) t.emplace_back(b.V(i, j), psi(i + 1, j), -1.0 / hx);
      if (inner_vertex(i, j)) t.emplace_back(b.V(i, j), psi(i, j), 1.0 / hx);
    }
  ops.curl = from_triplets(nfull, ops.n_psi, t);

  ops.k_bulk = SpMat(ops.strain.transpose() * ops.strain_weight.asDiagonal() * ops.strain);
  ops.vgram = vgram_with_coeff(ops, Vec::Constant(ops.n_nodes, alpha));
  return ops;
}

SpMat vgram_with_coeff(const DiscreteOperators& ops, const Vec& coeff) {
  if (coeff.size() != ops.n_nodes) throw std::invalid_argument("boundary coefficient length mismatch");
  if ((coeff.array() < 0.0).any()) throw std::invalid_argument("boundary coefficient must be nonnegative");
  Vec w = ops.mesh.weight.cwiseProduct(coeff);
  SpMat k = ops.k_bulk;
  k += SpMat(ops.normal_trace.transpose() * w.asDiagonal() * ops.normal_trace);
  k += SpMat(ops.tangential_trace.transpose() * w.asDiagonal() * ops.tangential_trace);
  k.makeCompressed();
  return k;
}

double norm_h(const DiscreteOperators& ops, const Vec& f) {
  return std::sqrt(f.cwiseProduct(ops.mass).dot(f));
}

double norm_v(const DiscreteOperators& ops, const Vec& f) {
  return std::sqrt(std::max(0.0, f.dot(ops.vgram * f)));
}

double seminorm_grad(const DiscreteOperators& ops, const Vec& f) {
  Vec g = ops.grad_rows * f;
  return std::sqrt(g.cwiseProduct(ops.grad_weight).dot(g));
}

double norm_h1(const DiscreteOperators& ops, const Vec& f) {
  double h = norm_h(ops, f), g = seminorm_grad(ops, f);
  return std::sqrt(h * h + g * g);
}

double norm_l4(const DiscreteOperators& ops, const Vec& f) {
  const Grid& g = ops.grid;
  double s = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double u = 0.5 * (f[g.xface(i, j)] + f[g.xface(i + 1, j)]);
      double v = 0.5 * (f[g.yface(i, j)] + f[g.yface(i, j + 1)]);
      double r2 = u * u + v * v;
      s += g.cell_area() * r2 * r2;
    }
  return std::pow(s, 0.25);
}

double norm_boundary(const DiscreteOperators& ops, const Vec& f) {
  Vec n = ops.normal_trace * f, t = ops.tangential_trace * f;
  double s = 0.0;
  for (int k = 0; k < ops.n_nodes; ++k)
    if (!ops.mesh.corner[k]) s += ops.mesh.weight[k] * (n[k] * n[k] + t[k] * t[k]);
  return std::sqrt(s);
}

GalerkinBasis stokes_eigenbasis(const DiscreteOperators& ops, int n) {
  return stokes_eigenbasis(ops, n, Vec::Constant(ops.n_nodes, ops.alpha));
}

GalerkinBasis stokes_eigenbasis(const DiscreteOperators& ops, int n, const Vec& coeff) {
  if (n < 1 || n > ops.n_psi)
    throw std::invalid_argument("basis size must lie in [1, " + std::to_string(ops.n_psi) + "]");
  SpMat k = vgram_with_coeff(ops, coeff);

  std::vector<int> tslots;
  for (int q = 0; q < ops.n_nodes; ++q)
    if (!ops.mesh.corner[q]) tslots.push_back(ops.slot(q));
  Vec ktt(tslots.size());
  for (size_t s = 0; s < tslots.size(); ++s) ktt[s] = k.coeff(tslots[s], tslots[s]);

  SpMat kc = k * ops.curl;
  Mat a = Mat(SpMat(ops.curl.transpose() * kc));
  Mat kt(tslots.size(), ops.n_psi);
  for (size_t s = 0; s < tslots.size(); ++s) kt.row(s) = Vec(kc.row(tslots[s]).transpose()).transpose();
  a.noalias() -= kt.transpose() * ktt.cwiseInverse().asDiagonal() * kt;
  a = 0.5 * (a + a.transpose()).eval();
  Mat mpsi = Mat(SpMat(ops.curl.transpose() * ops.mass.asDiagonal() * ops.curl));

  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(a, mpsi);
  if (es.info() != Eigen::Success) throw std::runtime_error("generalized eigensolver failed to converge");

  GalerkinBasis basis;
  basis.n = n;
  basis.boundary_coeff = coeff;
  basis.adjoint_variant = (coeff.array() != ops.alpha).any();
  basis.lambda = es.eigenvalues().head(n);
  basis.e = Mat::Zero(ops.n_full, n);
  for (int q = 0; q < n; ++q) {
    Vec psi = es.eigenvectors().col(q);
    Vec f = ops.curl * psi;
    Vec kf = kt * psi;
    for (size_t s = 0; s < tslots.size(); ++s) f[tslots[s]] = -kf[s] / ktt[s];
    double scale = f.cwiseAbs().maxCoeff();
    for (int d = 0; d < f.size(); ++d)
      if (std::abs(f[d]) > 1e-8 * scale) {
        if (f[d] < 0) f = -f;
        break;
      }
    f /= norm_h(ops, f);
    basis.e.col(q) = f;
  }
  basis.me = basis.e.transpose() * ops.mass.asDiagonal();
  return basis;
}

Vec project_to_basis(const Vec& field, const GalerkinBasis& basis) {
  if (field.size() != basis.me.cols()) throw std::invalid_argument("field size does not match the basis");
  return basis.me * field;
}

Vec reconstruct(const Vec& coeffs, const GalerkinBasis& basis) {
  if (coeffs.size() != basis.n) throw std::invalid_argument("coefficient count does not match the basis");
  return basis.e * coeffs;
}

LiftingSolver::LiftingSolver(std::shared_ptr<const DiscreteOperators> ops) : ops_(std::move(ops)) {
  const DiscreteOperators& o = *ops_;
  const int nf = static_cast<int>(o.free_dofs.size());
  const int nc = o.grid.num_cells();
  const double area = o.grid.cell_area();
  row_of_dof_.assign(o.n_full, -1);
  for (int r = 0; r < nf; ++r) row_of_dof_[o.free_dofs[r]] = r;
  n_unknowns_ = nf + nc + 1;

  Triplets t;
  for (int col = 0; col < o.vgram.outerSize(); ++col)
    for (SpMat::InnerIterator it(o.vgram, col); it; ++it) {
      int r = row_of_dof_[it.row()], c = row_of_dof_[it.col()];
      if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
    }
  for (int col = 0; col < o.div.outerSize(); ++col)
    for (SpMat::InnerIterator it(o.div, col); it; ++it) {
      int r = row_of_dof_[it.col()];
      if (r < 0) continue;
      t.emplace_back(r, nf + it.row(), -area * it.value());
      t.emplace_back(nf + it.row(), r, -area * it.value());
    }
  for (int c = 0; c < nc; ++c) {
    t.emplace_back(nf + c, nf + nc, area);
    t.emplace_back(nf + nc, nf + c, area);
  }
  SpMat s = from_triplets(n_unknowns_, n_unknowns_, t);
  lu_ = std::make_shared<Eigen::SparseLU<SpMat>>();
  lu_->analyzePattern(s);
  lu_->factorize(s);
  if (lu_->info() != Eigen::Success) throw std::runtime_error("singular lifting saddle system");
}

std::pair<Vec, Vec> LiftingSolver::solve_raw(const Vec& a, const Vec& b) const {
  const DiscreteOperators& o = *ops_;
  const int nf = static_cast<int>(o.free_dofs.size());
  const int nc = o.grid.num_cells();
  const double area = o.grid.cell_area();
  Vec fixed = o.face_from_nodes * a;
  Vec rhs = Vec::Zero(n_unknowns_);
  Vec kfixed = o.vgram * fixed;
  for (int r = 0; r < nf; ++r) rhs[r] = -kfixed[o.free_dofs[r]];
  for (int k = 0; k < o.n_nodes; ++k)
    if (!o.mesh.corner[k]) rhs[row_of_dof_[o.slot(k)]] += o.mesh.weight[k] * b[k];
  Vec dfixed = o.div * fixed;
  for (int c = 0; c < nc; ++c) rhs[nf + c] = area * dfixed[c];
  Vec sol = lu_->solve(rhs);
  Vec x = fixed;
  for (int r = 0; r < nf; ++r) x[o.free_dofs[r]] = sol[r];
  return {x, sol.segment(nf, nc)};
}

Vec LiftingSolver::lift_velocity(const Vec& a, const Vec& b) const {
  return solve_raw(enforce_compatibility(a, ops_->mesh), b).first;
}

LiftingField LiftingSolver::solve(const Vec& a, const Vec& b, double compat_tol) const {
  const DiscreteOperators& o = *ops_;
  if (a.size() != o.n_nodes || b.size() != o.n_nodes)
    throw std::invalid_argument("boundary data length does not match the boundary mesh");
  double flux = boundary_integral(a, o.mesh);
  if (std::abs(flux) > compat_tol * std::max(1.0, a.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("incompatible normal data: boundary integral " + fmt17(flux));

  LiftingField lf;
  lf.a = a;
  lf.b = b;
  std::tie(lf.velocity, lf.pressure) = solve_raw(a, b);
  const Vec& x = lf.velocity;
  const double area = o.grid.cell_area();

  Vec kx = o.vgram * x;
  Vec dtp = area * (o.div.transpose() * lf.pressure);
  Vec load = Vec::Zero(o.n_full);
  for (int k = 0; k < o.n_nodes; ++k)
    if (!o.mesh.corner[k]) load[o.slot(k)] = o.mesh.weight[k] * b[k];
  double res = 0, s1 = 0, s2 = 0, s3 = 0;
  for (int d : o.free_dofs) {
    double r = kx[d] - dtp[d] - load[d];
    res += r * r;
    s1 += kx[d] * kx[d];
    s2 += dtp[d] * dtp[d];
    s3 += load[d] * load[d];
  }
  double scale = std::sqrt(s1) + std::sqrt(s2) + std::sqrt(s3);
  lf.stokes_residual = scale > 0 ? std::sqrt(res) / scale : 0.0;

  Vec expected = o.face_from_nodes * a;
  double nmis = 0, amax = a.cwiseAbs().maxCoeff();
  for (const auto& f : o.boundary_faces) nmis = std::max(nmis, std::abs(x[f.face] - expected[f.face]));
  lf.normal_mismatch = amax > 0 ? nmis / amax : nmis;

  Vec shear = o.slip_shear * x, tang = o.tangential_trace * x;
  double smis = 0, sscale = 0;
  for (int k = 0; k < o.n_nodes; ++k) {
    if (o.mesh.corner[k]) continue;
    double trace = shear[k] + o.alpha * tang[k];
    smis = std::max(smis, std::abs(trace - b[k]));
    sscale = std::max({sscale, std::abs(b[k]), std::abs(shear[k])});
  }
  lf.slip_mismatch = sscale > 0 ? smis / sscale : smis;

  Vec dv = o.div * x;
  lf.divergence_l2 = std::sqrt(area * dv.squaredNorm());
  double data = surrogate_norm(a, b, o.mesh);
  lf.c_est = data > 0 ? norm_h1(o, x) / data : 0.0;
  return lf;
}

LiftingField solve_lifting(const Vec& a, const Vec& b, const DiscreteOperators& ops) {
  LiftingSolver solver(std::make_shared<const DiscreteOperators>(ops));
  return solver.solve(a, b);
}

LiftingMap build_lifting_map(const LiftingSolver& solver) {
  const DiscreteOperators& o = solver.ops();
  const int p = o.n_nodes;
  LiftingMap map;
  map.n_nodes = p;
  map.matrix.resize(o.n_full, 2 * p);
  Vec zero = Vec::Zero(p);
  for (int k = 0; k < p; ++k) {
    Vec unit = Vec::Zero(p);
    unit[k] = 1.0;
    map.matrix.col(k) = solver.lift_velocity(unit, zero);
    map.matrix.col(p + k) = solver.lift_velocity(zero, unit);
  }
  map.input_weight.resize(2 * p);
  map.input_weight << o.mesh.weight, o.mesh.weight;
  return map;
}

InequalityReport inequality_constants(const GalerkinBasis& basis, const DiscreteOperators& ops, int samples,
                                      std::uint64_t seed) {
  if (basis.n < 1) throw std::invalid_argument("empty basis");
  InequalityReport rep;
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  const Grid& g = ops.grid;
  double area = g.lx * g.ly;

  auto evaluate = [&](const Vec& c) {
    Vec v = basis.e * c;
    double h = norm_h(ops, v), gr = seminorm_grad(ops, v), vn = norm_v(ops, v);
    Vec centered = v;
    double mu = 0, mv = 0;
    for (int d = 0; d < ops.n_xfaces; ++d) mu += ops.mass[d] * v[d];
    for (int d = ops.n_xfaces; d < ops.n_xfaces + ops.n_yfaces; ++d) mv += ops.mass[d] * v[d];
    centered.head(ops.n_xfaces).array() -= mu / area;
    centered.segment(ops.n_xfaces, ops.n_yfaces).array() -= mv / area;
    double mixed = std::sqrt(h * gr);
    rep.li4 = std::max(rep.li4, norm_l4(ops, centered) / mixed);
    rep.trace2 = std::max(rep.trace2, norm_boundary(ops, v) / mixed);
    rep.korn = std::max(rep.korn, norm_h1(ops, v) / vn);
    rep.c_hat = std::max(rep.c_hat, (h * h) / (vn * vn));
    ++rep.samples;
  };
  for (int k = 0; k < basis.n; ++k) evaluate(Vec::Unit(basis.n, k));
  for (int s = 0; s < samples; ++s) {
    Vec c(basis.n);
    for (int k = 0; k < basis.n; ++k) c[k] = normal(rng);
    evaluate(c);
  }
  return rep;
}

}  // namespace nsslip
