#pragma once

#include <cmath>
#include <limits>

#include "degparab/mesh.hpp"

namespace degparab {

// Discrete L2 inner product with trapezoid node weights (the dual widths).
inline double l2_ip(const GradedMesh& m, const Field& f, const Field& g) {
  require_space_field(m, f, "l2_ip");
  require_space_field(m, g, "l2_ip");
  double s = 0.0;
  for (int i = 0; i <= m.N; ++i) s += m.w[std::size_t(i)] * f[std::size_t(i)] * g[std::size_t(i)];
  return s;
}

inline double l2_norm(const GradedMesh& m, const Field& f) {
  double s = l2_ip(m, f, f);
  return std::sqrt(s > 0.0 ? s : 0.0);
}

// Approximates the weighted integral of x^sigma * f over (0,1): the weight is
// sampled at cell midpoints (never at x = 0), f enters through its trapezoid
// cell average. Exponents sigma <= -1 are allowed only when f vanishes at the
// left endpoint, so the singular first cell carries a vanishing trapezoid
// value there.
inline double weighted_integral(const GradedMesh& m, const Field& f, double sigma) {
  require_space_field(m, f, "weighted_integral");
  if (sigma <= -1.0 && f[0] != 0.0)
    throw QuadratureDivergence(
        "weighted_integral: sigma <= -1 requires f to vanish at x = 0");
  double s = 0.0;
  for (int i = 0; i < m.N; ++i) {
    double xm = 0.5 * (m.x[std::size_t(i)] + m.x[std::size_t(i) + 1]);
    double fm = 0.5 * (f[std::size_t(i)] + f[std::size_t(i) + 1]);
    s += std::pow(xm, sigma) * fm * m.h[std::size_t(i)];
  }
  if (!std::isfinite(s))
    throw QuadratureDivergence("weighted_integral: non-finite result");
  return s;
}

// Squared weighted H1 seminorm: integral of x^alpha * f_x^2 with the
// difference quotient constant per cell and x^alpha at the cell midpoint.
inline double h1_alpha_semi_sq(const GradedMesh& m, const Field& f, double alpha) {
  require_space_field(m, f, "h1_alpha_semi_sq");
  double s = 0.0;
  for (int i = 0; i < m.N; ++i) {
    double xm = 0.5 * (m.x[std::size_t(i)] + m.x[std::size_t(i) + 1]);
    double q = (f[std::size_t(i) + 1] - f[std::size_t(i)]) / m.h[std::size_t(i)];
    s += std::pow(xm, alpha) * q * q * m.h[std::size_t(i)];
  }
  return s;
}

// H1_0 seminorm inner product of two sequences on the uniform time grid.
inline double h10_ip(const std::vector<double>& a, const std::vector<double>& b, double dt) {
  if (a.size() != b.size() || a.size() < 2)
    throw InvalidParameter("h10_ip: sequences must have equal size >= 2");
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < a.size(); ++j) {
    double da = (a[j + 1] - a[j]) / dt;
    double db = (b[j + 1] - b[j]) / dt;
    s += da * db * dt;
  }
  return s;
}

}  // namespace degparab
