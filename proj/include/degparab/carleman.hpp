#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "degparab/evolution.hpp"
#include "degparab/operator.hpp"

namespace degparab {

// Admissibility of (alpha, beta): every margin listed here must be strictly
// positive, and the four-factor product must come out positive as well.
struct AdmissibilityReport {
  double alpha = 0.0, beta = 0.0, T = 0.0, s = 0.0;
  double m_beta_above = 0.0;       // alpha + beta - 1          (beta above 1 - alpha)
  double m_beta_below = 0.0;       // 2 - 2 beta - alpha        (beta below 1 - alpha/2, J4/J5 coefficient)
  double m_two_minus = 0.0;        // 2 - alpha - beta
  double m_three_minus = 0.0;      // 3 - 2 alpha - beta
  double positivity_product = 0.0; // beta (a+b-1)(a+b-2)(2a+b-3)
  bool valid = false;
  std::vector<std::string> failures;
};

inline AdmissibilityReport admissibility(double alpha, double beta, double T, double s) {
  AdmissibilityReport r;
  r.alpha = alpha;
  r.beta = beta;
  r.T = T;
  r.s = s;
  r.m_beta_above = alpha + beta - 1.0;
  r.m_beta_below = 2.0 - 2.0 * beta - alpha;
  r.m_two_minus = 2.0 - alpha - beta;
  r.m_three_minus = 3.0 - 2.0 * alpha - beta;
  r.positivity_product =
      beta * (alpha + beta - 1.0) * (alpha + beta - 2.0) * (2.0 * alpha + beta - 3.0);
  if (!(alpha > 0.0 && alpha < 1.0)) r.failures.push_back("alpha not in (0,1)");
  if (!(T > 0.0)) r.failures.push_back("T not positive");
  if (!(s > 0.0)) r.failures.push_back("s not positive");
  if (!(r.m_beta_above > 0.0)) r.failures.push_back("alpha + beta - 1 not positive");
  if (!(r.m_two_minus > 0.0)) r.failures.push_back("alpha + beta - 2 not negative");
  if (!(r.m_three_minus > 0.0)) r.failures.push_back("2 alpha + beta - 3 not negative");
  if (!(r.m_beta_below > 0.0)) r.failures.push_back("2 - 2 beta - alpha not positive");
  if (!(r.positivity_product > 0.0)) r.failures.push_back("four-factor product not positive");
  r.valid = r.failures.empty();
  return r;
}

// Singular time weight l, boundary weight p, and the combined weight
// phi(x,t) = p(x) l(t) = -x^beta / (t (T-t)), all by closed form.
struct CarlemanContext {
  double alpha = 0.0, beta = 0.0, T = 0.0, s = 0.0;
  AdmissibilityReport report;

  double l(double t) const { return 1.0 / (t * (T - t)); }
  double l_t(double t) const {
    double lv = l(t);
    return (2.0 * t - T) * lv * lv;
  }
  double l_tt(double t) const {
    double lv = l(t);
    double d = T - 2.0 * t;
    return 2.0 * d * d * lv * lv * lv + 2.0 * lv * lv;
  }
  double p(double x) const { return -std::pow(x, beta); }

  double phi(double x, double t) const { return p(x) * l(t); }
  double phi_x(double x, double t) const { return -beta * std::pow(x, beta - 1.0) * l(t); }
  double phi_t(double x, double t) const { return p(x) * l_t(t); }
  double phi_tt(double x, double t) const { return p(x) * l_tt(t); }
  double phi_tx(double x, double t) const { return -beta * std::pow(x, beta - 1.0) * l_t(t); }
  double phi_xx(double x, double t) const {
    return -beta * (beta - 1.0) * std::pow(x, beta - 2.0) * l(t);
  }
};

inline CarlemanContext validate_context(double alpha, double beta, double T, double s) {
  AdmissibilityReport rep = admissibility(alpha, beta, T, s);
  if (!rep.valid) {
    std::string msg = "validate_context: inadmissible parameters:";
    for (const auto& f : rep.failures) msg += " [" + f + "]";
    throw AdmissibilityError(msg);
  }
  CarlemanContext ctx;
  ctx.alpha = alpha;
  ctx.beta = beta;
  ctx.T = T;
  ctx.s = s;
  ctx.report = rep;
  return ctx;
}

struct WeightSample {
  double l = 0.0, p = 0.0, phi = 0.0;
  double phi_x = 0.0, phi_t = 0.0, phi_tt = 0.0, phi_tx = 0.0, phi_xx = 0.0;
};

inline WeightSample weights(const CarlemanContext& ctx, double x, double t) {
  if (!(t > 0.0 && t < ctx.T))
    throw InvalidParameter("weights: l(t) is singular at t = 0 and t = T");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidParameter("weights: x must lie in [0,1]");
  WeightSample w;
  w.l = ctx.l(t);
  w.p = ctx.p(x);
  w.phi = ctx.phi(x, t);
  w.phi_x = ctx.phi_x(x, t);
  w.phi_t = ctx.phi_t(x, t);
  w.phi_tt = ctx.phi_tt(x, t);
  w.phi_tx = ctx.phi_tx(x, t);
  w.phi_xx = ctx.phi_xx(x, t);
  return w;
}

// exp(2 s phi) evaluated in log space: clamped to 0 once the exponent drops
// below -700, where the true value underflows anyway.
inline double conjugation_weight(double exponent) {
  return exponent < -700.0 ? 0.0 : std::exp(exponent);
}

namespace detail {

inline void require_band_compatible(const CarlemanContext& ctx, const GradedMesh& m,
                                    const SpaceTimeField& W, const char* where) {
  if (W.N != m.N || W.M != m.M)
    throw MeshMismatch(std::string(where) + ": field does not match mesh");
  if (std::abs(m.T - ctx.T) > 1e-12 * std::max(1.0, ctx.T))
    throw MeshMismatch(std::string(where) + ": mesh horizon differs from context");
  double scale = 0.0;
  for (double v : W.data) scale = std::max(scale, std::abs(v));
  double tol = 1e-12 * std::max(1.0, scale);
  for (int j = 1; j < m.M; ++j)
    if (std::abs(W.at(j, 0)) > tol || std::abs(W.at(j, m.N)) > tol)
      throw HypothesisViolation(std::string(where) +
                                ": field must vanish at x = 0 and x = 1 on the time band");
}

// centered d/dx with one-sided ends, single time row
inline Field ddx_row(const GradedMesh& m, const SpaceTimeField& W, int j) {
  Field out(std::size_t(m.N) + 1, 0.0);
  out[0] = (W.at(j, 1) - W.at(j, 0)) / (m.x[1] - m.x[0]);
  out[std::size_t(m.N)] =
      (W.at(j, m.N) - W.at(j, m.N - 1)) / (m.x[std::size_t(m.N)] - m.x[std::size_t(m.N) - 1]);
  for (int i = 1; i < m.N; ++i)
    out[std::size_t(i)] =
        (W.at(j, i + 1) - W.at(j, i - 1)) / (m.x[std::size_t(i) + 1] - m.x[std::size_t(i) - 1]);
  return out;
}

// centered d/dt, rows 1..M-1 only
inline Field ddt_row(const GradedMesh& m, const SpaceTimeField& W, int j) {
  Field out(std::size_t(m.N) + 1, 0.0);
  for (int i = 0; i <= m.N; ++i)
    out[std::size_t(i)] = (W.at(j + 1, i) - W.at(j - 1, i)) / (2.0 * m.dt);
  return out;
}

}  // namespace detail

// Splitting of the conjugated operator into its self-adjoint and skew parts:
//   Lp w = (x^a w_x)_x - s phi_t w + s^2 x^a phi_x^2 w
//   Lm w = w_t - 2 s x^a phi_x w_x - s (x^a phi_x)_x w.
// Both are evaluated on the interior time band j = 1..M-1; the first and last
// rows stay zero.
inline std::pair<SpaceTimeField, SpaceTimeField> decompose_Ls(const DegenerateOperator& op,
                                                              const SpaceTimeField& W,
                                                              const CarlemanContext& ctx) {
  const GradedMesh& m = op.mesh;
  detail::require_band_compatible(ctx, m, W, "decompose_Ls");
  double a = ctx.alpha, b = ctx.beta, s = ctx.s;

  int N = m.N, M = m.M;
  // x-powers at the interior nodes, fixed exponents
  std::vector<double> xb(std::size_t(N) - 1), xg2(std::size_t(N) - 1), xg1(std::size_t(N) - 1),
      xg0(std::size_t(N) - 1);
  for (int i = 1; i < N; ++i) {
    double xi = m.x[std::size_t(i)];
    std::size_t k = std::size_t(i) - 1;
    xb[k] = std::pow(xi, b);                  // phi_t carrier
    xg2[k] = std::pow(xi, a + 2.0 * b - 2.0); // x^a phi_x^2 carrier
    xg1[k] = std::pow(xi, a + b - 1.0);       // x^a phi_x carrier
    xg0[k] = std::pow(xi, a + b - 2.0);       // (x^a phi_x)_x carrier
  }

  SpaceTimeField Lp(N, M), Lm(N, M);
  for (int j = 1; j < M; ++j) {
    double tj = m.t[std::size_t(j)];
    double lv = ctx.l(tj), lpv = ctx.l_t(tj);
    Field row = W.row(j);
    Field Aw = degparab::apply(op, row);
    Field Wx = detail::ddx_row(m, W, j);
    Field Wt = detail::ddt_row(m, W, j);
    for (int i = 1; i < N; ++i) {
      std::size_t k = std::size_t(i) - 1;
      double wv = row[std::size_t(i)];
      double phi_t = -xb[k] * lpv;
      double xaphix2 = b * b * lv * lv * xg2[k];
      double xaphix = -b * lv * xg1[k];
      double dxaphix = -b * (a + b - 1.0) * lv * xg0[k];
      Lp.at(j, i) = Aw[std::size_t(i)] - s * phi_t * wv + s * s * xaphix2 * wv;
      Lm.at(j, i) = Wt[std::size_t(i)] - 2.0 * s * xaphix * Wx[std::size_t(i)] - s * dxaphix * wv;
    }
  }
  return {std::move(Lp), std::move(Lm)};
}

// The five exact terms the product integral of Lp and Lm decomposes into,
// integrated over the interior time band with trapezoid weights in t and the
// midpoint-weighted cell rule in x. The l l_t cross term enters with a minus
// sign; l l_t is antisymmetric about T/2, so only profiles that break the
// time symmetry are sensitive to it.
struct IdentityParts {
  double lhs = 0.0;
  double t_time = 0.0;       // (s/2) phi_tt w^2
  double t_mixed = 0.0;      // s x^a (x^a phi_x)_xx w w_x
  double t_cross = 0.0;      // -2 s^2 x^a phi_x phi_tx w^2
  double t_gradient = 0.0;   // s (2 x^{2a} phi_xx + a x^{2a-1} phi_x) w_x^2
  double t_cubic = 0.0;      // s^3 (2 x^a phi_xx + a x^{a-1} phi_x) x^a phi_x^2 w^2
  double residual = 0.0;
};

inline IdentityParts identity_parts(const DegenerateOperator& op, const SpaceTimeField& W,
                                    const CarlemanContext& ctx) {
  const GradedMesh& m = op.mesh;
  detail::require_band_compatible(ctx, m, W, "identity_parts");
  double a = ctx.alpha, b = ctx.beta, s = ctx.s;
  int N = m.N, M = m.M;

  auto [Lp, Lm] = decompose_Ls(op, W, ctx);

  // cell midpoints and fixed-exponent powers
  const std::size_t nc = std::size_t(N);
  std::vector<double> xm(nc), pm_b(nc), pm_mix(nc), pm_cross(nc), pm_grad(nc), pm_cubic(nc);
  for (int i = 0; i < N; ++i) {
    std::size_t k = std::size_t(i);
    xm[k] = 0.5 * (m.x[k] + m.x[k + 1]);
    pm_b[k] = std::pow(xm[k], b);
    pm_mix[k] = std::pow(xm[k], 2.0 * a + b - 3.0);
    pm_cross[k] = std::pow(xm[k], a + 2.0 * b - 2.0);
    pm_grad[k] = std::pow(xm[k], 2.0 * a + b - 2.0);
    pm_cubic[k] = std::pow(xm[k], 2.0 * a + 3.0 * b - 4.0);
  }

  IdentityParts out;
  double c_mix = -b * (a + b - 1.0) * (a + b - 2.0);
  double c_grad = b * (2.0 - 2.0 * b - a);
  double c_cubic = b * b * b * (2.0 - 2.0 * b - a);
  for (int j = 1; j < M; ++j) {
    double tj = m.t[std::size_t(j)];
    double wt = (j == 1 || j == M - 1) ? m.dt / 2.0 : m.dt;
    double lv = ctx.l(tj), lpv = ctx.l_t(tj), lppv = ctx.l_tt(tj);

    double dot = 0.0;
    for (int i = 0; i <= N; ++i)
      dot += m.w[std::size_t(i)] * Lp.at(j, i) * Lm.at(j, i);
    out.lhs += wt * dot;

    double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0, s5 = 0.0;
    for (int i = 0; i < N; ++i) {
      std::size_t k = std::size_t(i);
      double wl = W.at(j, i), wr = W.at(j, i + 1);
      double w2m = 0.5 * (wl * wl + wr * wr);
      double wm = 0.5 * (wl + wr);
      double q = (wr - wl) / m.h[k];
      s1 += (-pm_b[k] * lppv) * w2m * m.h[k];
      s2 += (c_mix * lv * pm_mix[k]) * wm * q * m.h[k];
      s3 += (b * b * lv * lpv * pm_cross[k]) * w2m * m.h[k];
      s4 += (c_grad * lv * pm_grad[k]) * q * q * m.h[k];
      s5 += (c_cubic * lv * lv * lv * pm_cubic[k]) * w2m * m.h[k];
    }
    out.t_time += wt * (s / 2.0) * s1;
    out.t_mixed += wt * s * s2;
    out.t_cross += wt * (-2.0) * s * s * s3;
    out.t_gradient += wt * s * s4;
    out.t_cubic += wt * s * s * s * s5;
  }

  double sum = out.t_time + out.t_mixed + out.t_cross + out.t_gradient + out.t_cubic;
  double scale = std::abs(out.lhs) + std::abs(out.t_time) + std::abs(out.t_mixed) +
                 std::abs(out.t_cross) + std::abs(out.t_gradient) + std::abs(out.t_cubic) +
                 std::numeric_limits<double>::epsilon();
  out.residual = std::abs(out.lhs - sum) / scale;
  return out;
}

inline double identity_residual(const DegenerateOperator& op, const SpaceTimeField& W,
                                const CarlemanContext& ctx) {
  return identity_parts(op, W, ctx).residual;
}

enum class CarlemanVariant { theorem, corollary };

// Both sides of the weighted observability-type estimate, integrated over the
// interior time band. The corollary variant drops the singular x-power from
// the cubic block (that power is >= 1 on (0,1), so the corollary left side
// can only be smaller).
struct CarlemanSides {
  double lhs_cubic = 0.0;
  double lhs_linear = 0.0;
  double lhs_gradient = 0.0;
  double rhs = 0.0;
  CarlemanVariant variant = CarlemanVariant::theorem;
  // share of all four integrals contributed by the outermost band rows;
  // reports how much the excluded slivers near t = 0, T could still matter
  double outer_band_share = 0.0;
};

inline CarlemanSides carleman_sides(const DegenerateOperator& op, const SpaceTimeField& V,
                                    const CarlemanContext& ctx, CarlemanVariant variant) {
  const GradedMesh& m = op.mesh;
  detail::require_band_compatible(ctx, m, V, "carleman_sides");
  if (std::abs(op.alpha - ctx.alpha) > 0.0)
    throw InvalidParameter("carleman_sides: operator and context alpha differ");
  double a = ctx.alpha, b = ctx.beta, s = ctx.s;
  int N = m.N, M = m.M;

  const std::size_t nc = std::size_t(N);
  std::vector<double> xm(nc), pm_b(nc), pm_cubic(nc), pm_lin(nc), pm_grad(nc);
  for (int i = 0; i < N; ++i) {
    std::size_t k = std::size_t(i);
    xm[k] = 0.5 * (m.x[k] + m.x[k + 1]);
    pm_b[k] = std::pow(xm[k], b);
    pm_cubic[k] = std::pow(xm[k], 2.0 * a + 3.0 * b - 4.0);
    pm_lin[k] = std::pow(xm[k], 2.0 * a + b - 4.0);
    pm_grad[k] = std::pow(xm[k], 2.0 * a + b - 2.0);
  }

  CarlemanSides out;
  out.variant = variant;
  double outer = 0.0;
  for (int j = 1; j < M; ++j) {
    double tj = m.t[std::size_t(j)];
    double wt = (j == 1 || j == M - 1) ? m.dt / 2.0 : m.dt;
    double lv = ctx.l(tj);

    Field row = V.row(j);
    Field Lv = detail::ddt_row(m, V, j);
    Field Av = degparab::apply(op, row);
    for (int i = 0; i <= N; ++i) Lv[std::size_t(i)] += Av[std::size_t(i)];

    double cub = 0.0, lin = 0.0, grad = 0.0, rhs = 0.0;
    for (int i = 0; i < N; ++i) {
      std::size_t k = std::size_t(i);
      double E = conjugation_weight(-2.0 * s * lv * pm_b[k]);
      if (E == 0.0) continue;
      double vl = row[k], vr = row[k + 1];
      double v2 = 0.5 * (vl * vl + vr * vr);
      double q = (vr - vl) / m.h[k];
      double Ll = Lv[k], Lr = Lv[k + 1];
      double L2 = 0.5 * (Ll * Ll + Lr * Lr);
      double cw = (variant == CarlemanVariant::theorem) ? pm_cubic[k] : 1.0;
      cub += cw * v2 * E * m.h[k];
      lin += pm_lin[k] * v2 * E * m.h[k];
      grad += pm_grad[k] * q * q * E * m.h[k];
      rhs += L2 * E * m.h[k];
    }
    double s3l3 = s * s * s * lv * lv * lv;
    double rowsum = wt * (s3l3 * cub + s * lv * lin + s * lv * grad + rhs);
    out.lhs_cubic += wt * s3l3 * cub;
    out.lhs_linear += wt * s * lv * lin;
    out.lhs_gradient += wt * s * lv * grad;
    out.rhs += wt * rhs;
    if (j == 1 || j == M - 1) outer += rowsum;
  }

  double total = out.lhs_cubic + out.lhs_linear + out.lhs_gradient + out.rhs;
  out.outer_band_share = total > 0.0 ? outer / total : 0.0;
  if (!(std::isfinite(out.lhs_cubic) && std::isfinite(out.lhs_linear) &&
        std::isfinite(out.lhs_gradient) && std::isfinite(out.rhs)))
    throw QuadratureDivergence("carleman_sides: non-finite integral");
  return out;
}

struct SweepPoint {
  double s = 0.0;
  CarlemanSides sides;
  double ratio = std::numeric_limits<double>::quiet_NaN();
  bool defined = false;  // false when the right side vanishes (0/0 sweep)
};

struct SweepResult {
  std::vector<SweepPoint> points;
  bool tail_defined = false;  // needs >= 2 sweep values with defined ratios in the top half
  bool bounded_tail = false;  // max of the top half <= 1.1 times its median
};

inline SweepResult ratio_sweep(const DegenerateOperator& op, const SpaceTimeField& V, double beta,
                               const std::vector<double>& s_list, CarlemanVariant variant) {
  if (s_list.empty()) throw InvalidParameter("ratio_sweep: empty s list");
  SweepResult res;
  for (double s : s_list) {
    CarlemanContext ctx = validate_context(op.alpha, beta, op.mesh.T, s);
    SweepPoint pt;
    pt.s = s;
    pt.sides = carleman_sides(op, V, ctx, variant);
    double lhs = pt.sides.lhs_cubic + pt.sides.lhs_linear + pt.sides.lhs_gradient;
    if (pt.sides.rhs > 0.0) {
      pt.ratio = lhs / pt.sides.rhs;
      pt.defined = true;
    }
    res.points.push_back(pt);
  }
  std::size_t n = res.points.size();
  if (n >= 2) {
    std::size_t k = (n + 1) / 2;  // top half, rounded up
    std::vector<double> top;
    bool all_defined = true;
    for (std::size_t i = n - k; i < n; ++i) {
      if (!res.points[i].defined) all_defined = false;
      top.push_back(res.points[i].ratio);
    }
    if (all_defined) {
      res.tail_defined = true;
      std::vector<double> sorted = top;
      std::sort(sorted.begin(), sorted.end());
      double med = (k % 2 == 1) ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);
      double mx = sorted.back();
      res.bounded_tail = mx <= 1.1 * med;
    }
  }
  return res;
}

}  // namespace degparab
