#pragma once

#include "nsslip/geometry.hpp"

namespace nsslip {

// Boundary controls on nodes (rows) x time nodes (columns).
struct ControlPair {
  Mat a, b;

  static ControlPair zeros(int nodes, int time_nodes) {
    return {Mat::Zero(nodes, time_nodes), Mat::Zero(nodes, time_nodes)};
  }
  int nodes() const { return static_cast<int>(a.rows()); }
  int time_nodes() const { return static_cast<int>(a.cols()); }

  // Stacked input (a_k, b_k) at time node k.
  Vec stacked(int k) const {
    Vec t(2 * a.rows());
    t << a.col(k), b.col(k);
    return t;
  }
  Mat stacked_all() const {
    Mat t(2 * a.rows(), a.cols());
    t << a, b;
    return t;
  }
  static ControlPair from_stacked(const Mat& t) {
    const auto p = t.rows() / 2;
    return {t.topRows(p), t.bottomRows(p)};
  }

  ControlPair operator+(const ControlPair& o) const { return {a + o.a, b + o.b}; }
  ControlPair operator-(const ControlPair& o) const { return {a - o.a, b - o.b}; }
  ControlPair operator*(double s) const { return {a * s, b * s}; }

  double surrogate_norm_at(int k, const BoundaryMesh& mesh) const {
    return surrogate_norm(a.col(k), b.col(k), mesh);
  }
};

}  // namespace nsslip
