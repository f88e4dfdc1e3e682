#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "degparab/operator.hpp"

namespace degparab {

enum class Scheme { implicit_euler, crank_nicolson };

inline double theta_of(Scheme s) {
  return s == Scheme::crank_nicolson ? 0.5 : 1.0;
}

// Boundary lifting profile 1 - x^{1-alpha}: value 1 at x = 0, 0 at x = 1,
// and annihilated by the flux-form operator (its weighted flux is constant).
inline Field lifting(double alpha, const GradedMesh& m) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw UnsupportedRegime("lifting: alpha must lie in [0,1)");
  Field f(std::size_t(m.N) + 1);
  double p = 1.0 - alpha;
  for (int i = 0; i <= m.N; ++i) f[std::size_t(i)] = 1.0 - std::pow(m.x[std::size_t(i)], p);
  f[0] = 1.0;
  f[std::size_t(m.N)] = 0.0;
  return f;
}

// Discrete time derivative of a control sequence: centered at interior time
// nodes, one-sided at the ends.
inline std::vector<double> dgdt_seq(const std::vector<double>& g, double dt) {
  std::size_t n = g.size();
  std::vector<double> d(n);
  d[0] = (g[1] - g[0]) / dt;
  d[n - 1] = (g[n - 1] - g[n - 2]) / dt;
  for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (g[j + 1] - g[j - 1]) / (2.0 * dt);
  return d;
}

struct Trajectory {
  SpaceTimeField states;
  Field terminal;                      // equals the last time slice exactly
  std::vector<double> conormal_trace;  // first-face flux per time node
  std::vector<double> energy_l2_sq;    // squared L2 norm per time node
  double h1_alpha_time_integral = 0.0; // time-trapezoid of the weighted gradient integral
};

namespace detail {

// theta-stepping of the lifted interior problem
//   y' = A y - lift * g'(t),   u = y + lift * g,
// with y the interior unknowns. Returns the full nodal history of u.
inline SpaceTimeField theta_march(const DegenerateOperator& op, const Field& u0,
                                  const std::vector<double>& g, Scheme scheme) {
  const GradedMesh& m = op.mesh;
  int N = m.N;
  int M = m.M;
  double dt = m.dt;
  double theta = theta_of(scheme);
  std::size_t n = std::size_t(N) - 1;

  Tridiag lhs;
  lhs.lo.resize(n);
  lhs.di.resize(n);
  lhs.up.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    lhs.lo[i] = -theta * dt * op.lo[i];
    lhs.di[i] = 1.0 - theta * dt * op.di[i];
    lhs.up[i] = -theta * dt * op.up[i];
  }

  Field lift = lifting(op.alpha, m);
  std::vector<double> dg = dgdt_seq(g, dt);

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = u0[i + 1] - lift[i + 1] * g[0];

  SpaceTimeField U(N, M);
  U.set_row(0, u0);
  for (int j = 0; j < M; ++j) {
    double mstar = theta * dg[std::size_t(j) + 1] + (1.0 - theta) * dg[std::size_t(j)];
    std::vector<double> rhs = y;
    if (theta != 1.0) {
      std::vector<double> Ay = apply_interior(op, y);
      for (std::size_t i = 0; i < n; ++i) rhs[i] += (1.0 - theta) * dt * Ay[i];
    }
    for (std::size_t i = 0; i < n; ++i) rhs[i] += dt * (-lift[i + 1]) * mstar;
    y = thomas_solve(lhs, rhs);
    U.at(j + 1, 0) = g[std::size_t(j) + 1];
    for (std::size_t i = 0; i < n; ++i) U.at(j + 1, int(i) + 1) = y[i] + lift[i + 1] * g[std::size_t(j) + 1];
    U.at(j + 1, N) = 0.0;
  }
  for (double v : U.data)
    if (!std::isfinite(v)) throw SolveFailure("theta_march: non-finite state");
  return U;
}

inline Trajectory finish_trajectory(const DegenerateOperator& op, SpaceTimeField&& U) {
  const GradedMesh& m = op.mesh;
  Trajectory tr;
  tr.states = std::move(U);
  tr.terminal = tr.states.row(m.M);
  tr.conormal_trace.resize(std::size_t(m.M) + 1);
  tr.energy_l2_sq.resize(std::size_t(m.M) + 1);
  double acc = 0.0;
  for (int j = 0; j <= m.M; ++j) {
    Field row = tr.states.row(j);
    tr.conormal_trace[std::size_t(j)] = conormal_trace_at_zero(op, row);
    double l2 = l2_ip(m, row, row);
    tr.energy_l2_sq[std::size_t(j)] = l2 > 0.0 ? l2 : 0.0;
    double wt = (j == 0 || j == m.M) ? m.dt / 2.0 : m.dt;
    acc += wt * h1_alpha_semi_sq(m, row, op.alpha);
  }
  tr.h1_alpha_time_integral = acc;
  return tr;
}

}  // namespace detail

// Forward problem: Dirichlet data g(t) at x = 0, homogeneous at x = 1,
// initial state u0 compatible with both boundary values.
inline Trajectory solve_forward(const DegenerateOperator& op, const Field& u0,
                                const std::vector<double>& g, Scheme scheme) {
  const GradedMesh& m = op.mesh;
  require_space_field(m, u0, "solve_forward");
  require_time_seq(m, g, "solve_forward");
  double scale_u = 0.0, scale_g = 0.0;
  for (double v : u0) scale_u = std::max(scale_u, std::abs(v));
  for (double v : g) scale_g = std::max(scale_g, std::abs(v));
  double tol_u = 1e-12 * std::max(1.0, scale_u);
  double tol_g = 1e-12 * std::max(1.0, scale_g);
  if (std::abs(u0[0]) > tol_u || std::abs(u0[std::size_t(m.N)]) > tol_u)
    throw HypothesisViolation("solve_forward: u0 must vanish at both endpoints");
  if (std::abs(g[0]) > tol_g || std::abs(g[std::size_t(m.M)]) > tol_g)
    throw HypothesisViolation("solve_forward: g must vanish at t = 0 and t = T");
  return detail::finish_trajectory(op, detail::theta_march(op, u0, g, scheme));
}

// Free evolution from arbitrary L2 data: no boundary compatibility demanded.
// The Dirichlet rows carry no dynamics, so the endpoint samples of u0 are
// replaced by the boundary values (0) before stepping.
inline Trajectory free_evolve(const DegenerateOperator& op, const Field& u0, Scheme scheme) {
  const GradedMesh& m = op.mesh;
  require_space_field(m, u0, "free_evolve");
  Field u0c = u0;
  u0c[0] = 0.0;
  u0c[std::size_t(m.N)] = 0.0;
  std::vector<double> g(std::size_t(m.M) + 1, 0.0);
  return detail::finish_trajectory(op, detail::theta_march(op, u0c, g, scheme));
}

// Backward problem v_t + A v = 0 with final data v at t = T. In reversed
// time it is the same forward degenerate equation, so solve that and flip:
// the returned states satisfy states(M) = v exactly.
inline Trajectory solve_adjoint(const DegenerateOperator& op, const Field& v, Scheme scheme) {
  const GradedMesh& m = op.mesh;
  require_space_field(m, v, "solve_adjoint");
  double scale = 0.0;
  for (double z : v) scale = std::max(scale, std::abs(z));
  double tol = 1e-12 * std::max(1.0, scale);
  if (std::abs(v[0]) > tol || std::abs(v[std::size_t(m.N)]) > tol)
    throw HypothesisViolation("solve_adjoint: final data must vanish at both endpoints");
  std::vector<double> g(std::size_t(m.M) + 1, 0.0);
  SpaceTimeField W = detail::theta_march(op, v, g, Scheme(scheme));
  SpaceTimeField V(m.N, m.M);
  for (int j = 0; j <= m.M; ++j)
    for (int i = 0; i <= m.N; ++i) V.at(j, i) = W.at(m.M - j, i);
  return detail::finish_trajectory(op, std::move(V));
}

struct EnergyReport {
  double sup_l2_sq = 0.0;
  double h1_alpha_time_integral = 0.0;
  double data_norm_sq = 0.0;  // squared H1_0 seminorm of g plus squared L2 norm of u0
};

inline EnergyReport energy_report(const Trajectory& tr, const DegenerateOperator& op,
                                  const Field& u0, const std::vector<double>& g) {
  const GradedMesh& m = op.mesh;
  require_space_field(m, u0, "energy_report");
  require_time_seq(m, g, "energy_report");
  EnergyReport r;
  for (double e : tr.energy_l2_sq) r.sup_l2_sq = std::max(r.sup_l2_sq, e);
  r.h1_alpha_time_integral = tr.h1_alpha_time_integral;
  double gprime = h10_ip(g, g, m.dt);
  double u0n = l2_ip(m, u0, u0);
  r.data_norm_sq = gprime + (u0n > 0.0 ? u0n : 0.0);
  return r;
}

}  // namespace degparab
