#pragma once

#include <cmath>

#include "nsslip/control.hpp"

namespace nsslip::testing {

// a = A cos(2 pi m_a s/|G|)(1 + t), b = B sin(2 pi m_b s/|G|)(1 - t/2)
inline ControlPair shape(const Model& m, double A, double B, int ma, int mb) {
  ControlPair u = ControlPair::zeros(m.nodes(), m.time.steps + 1);
  const auto& mesh = m.ops->mesh;
  for (int k = 0; k <= m.time.steps; ++k)
    for (int q = 0; q < m.nodes(); ++q) {
      double s = mesh.arclength[q] / mesh.perimeter, t = m.time.time(k);
      u.a(q, k) = A * std::cos(2 * M_PI * ma * s) * (1 + t);
      u.b(q, k) = B * std::sin(2 * M_PI * mb * s) * (1 - 0.5 * t);
    }
  return u;
}

// Smooth field target built from one basis mode and a lifted boundary wave.
inline Target smooth_target(const Model& m) {
  Mat yd(m.ops->n_full, m.time.steps + 1);
  ControlPair w = shape(m, 0.1, 0.1, 3, 3);
  for (int k = 0; k <= m.time.steps; ++k) yd.col(k) = 0.3 * m.basis.e.col(2) + m.lift.matrix * w.stacked(k);
  return field_target(m, yd);
}

inline ModelSpec oracle_spec() {
  ModelSpec s;
  s.domain.nx = s.domain.ny = 8;
  s.steps = 32;
  s.n = 8;
  return s;
}

inline Vec oracle_y0(int n) {
  Vec y = Vec::Zero(n);
  y[0] = 0.8;
  y[1] = -0.4;
  return y;
}

inline double mean_tracking(const Model& m, const Vec& y0, const ControlPair& u, const Target& tg, int samples,
                            std::uint64_t seed) {
  auto lc = lift_controls(m, u);
  TrackingData td = make_tracking(m, *lc, tg);
  Ensemble e = forward_ensemble(m, y0, lc, seed, samples, 1);
  double s = 0.0;
  for (int i = 0; i < samples; ++i) s += tracking_cost(m, e.paths[i], td, tg, i);
  return s / samples;
}

}  // namespace nsslip::testing
