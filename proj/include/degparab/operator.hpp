#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "degparab/mesh.hpp"
#include "degparab/quadrature.hpp"
#include "degparab/tridiag.hpp"

namespace degparab {

enum class BoundaryTag { dirichlet, none };

// Flux-form discretization of f -> (x^alpha f_x)_x.
//
// Face coefficients are the exact-flux (harmonic-type) averages
//   c_{i+1/2} = (1 - alpha) h_i / (x_{i+1}^{1-alpha} - x_i^{1-alpha}),
// which reduce to 1 at alpha = 0 and reproduce the constant flux of the
// profile 1 - x^{1-alpha} exactly across every face, including the first one
// touching the degenerate endpoint. A plain midpoint sample ((x_i+x_{i+1})/2)^alpha
// over-weights the first face so badly on graded meshes that the conormal
// trace at 0 converges to the wrong value; the exact-flux average keeps both
// the trace and the null profile consistent under refinement.
struct DegenerateOperator {
  double alpha = 0.0;
  BoundaryTag bc_left = BoundaryTag::dirichlet;
  BoundaryTag bc_right = BoundaryTag::dirichlet;
  GradedMesh mesh;

  std::vector<double> c;            // face coefficients, size N
  std::vector<double> lo, di, up;   // interior rows for nodes 1..N-1, size N-1
};

inline DegenerateOperator assemble(double alpha, const GradedMesh& mesh,
                                   BoundaryTag bc_left = BoundaryTag::dirichlet,
                                   BoundaryTag bc_right = BoundaryTag::dirichlet) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw UnsupportedRegime("assemble: alpha must lie in [0,1)");

  DegenerateOperator op;
  op.alpha = alpha;
  op.bc_left = bc_left;
  op.bc_right = bc_right;
  op.mesh = mesh;

  int N = mesh.N;
  op.c.resize(std::size_t(N));
  double p = 1.0 - alpha;
  for (int i = 0; i < N; ++i) {
    if (alpha == 0.0) {
      op.c[std::size_t(i)] = 1.0;
    } else {
      double d = std::pow(mesh.x[std::size_t(i) + 1], p) - std::pow(mesh.x[std::size_t(i)], p);
      op.c[std::size_t(i)] = p * mesh.h[std::size_t(i)] / d;
    }
  }

  op.lo.resize(std::size_t(N) - 1);
  op.di.resize(std::size_t(N) - 1);
  op.up.resize(std::size_t(N) - 1);
  for (int i = 1; i < N; ++i) {
    std::size_t k = std::size_t(i) - 1;
    double wl = op.c[std::size_t(i) - 1] / (mesh.h[std::size_t(i) - 1] * mesh.w[std::size_t(i)]);
    double wr = op.c[std::size_t(i)] / (mesh.h[std::size_t(i)] * mesh.w[std::size_t(i)]);
    op.lo[k] = wl;
    op.up[k] = wr;
    op.di[k] = -(wl + wr);
  }
  return op;
}

// Action on the interior unknowns only (node i corresponds to index i-1).
inline std::vector<double> apply_interior(const DegenerateOperator& op,
                                          const std::vector<double>& y) {
  std::size_t n = op.lo.size();
  if (y.size() != n) throw MeshMismatch("apply_interior: size mismatch");
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double v = op.di[k] * y[k];
    if (k > 0) v += op.lo[k] * y[k - 1];
    if (k + 1 < n) v += op.up[k] * y[k + 1];
    out[k] = v;
  }
  return out;
}

// Full nodal action; boundary rows carry no stencil and return 0.
inline Field apply(const DegenerateOperator& op, const Field& f) {
  require_space_field(op.mesh, f, "apply");
  int N = op.mesh.N;
  Field out(std::size_t(N) + 1, 0.0);
  for (int i = 1; i < N; ++i) {
    std::size_t k = std::size_t(i) - 1;
    out[std::size_t(i)] = op.lo[k] * f[std::size_t(i) - 1] + op.di[k] * f[std::size_t(i)] +
                          op.up[k] * f[std::size_t(i) + 1];
  }
  return out;
}

// Discrete limit of x^alpha f_x at the degenerate endpoint: the first-face flux.
inline double conormal_trace_at_zero(const DegenerateOperator& op, const Field& f) {
  require_space_field(op.mesh, f, "conormal_trace_at_zero");
  return op.c[0] * (f[1] - f[0]) / op.mesh.h[0];
}

inline double conormal_trace_at_one(const DegenerateOperator& op, const Field& f) {
  require_space_field(op.mesh, f, "conormal_trace_at_one");
  std::size_t N = std::size_t(op.mesh.N);
  return op.c[N - 1] * (f[N] - f[N - 1]) / op.mesh.h[N - 1];
}

struct WeightedNorms {
  double l2 = 0.0;
  double h1_alpha_semi = 0.0;  // sqrt of the x^alpha-weighted gradient integral
  double graph = 0.0;          // l2 norm of f plus l2 norm of A f
};

inline WeightedNorms norms(const DegenerateOperator& op, const Field& f) {
  require_space_field(op.mesh, f, "norms");
  WeightedNorms n;
  n.l2 = l2_norm(op.mesh, f);
  double semi2 = h1_alpha_semi_sq(op.mesh, f, op.alpha);
  n.h1_alpha_semi = std::sqrt(semi2 > 0.0 ? semi2 : 0.0);
  n.graph = n.l2 + l2_norm(op.mesh, degparab::apply(op, f));
  return n;
}

inline double graph_norm(const DegenerateOperator& op, const Field& f) {
  return l2_norm(op.mesh, f) + l2_norm(op.mesh, degparab::apply(op, f));
}

// Hardy-type pointwise and integral bounds for functions in the discrete
// operator domain whose weighted flux vanishes at x = 0.
struct HardyReport {
  double flux_bound_margin = 0.0;      // min over faces of |f|_graph sqrt(x) - |x^alpha f_x|
  double solution_bound_margin = 0.0;  // min over nodes of (2/(3-2a)) |f|_graph sqrt(x) - |x^(a-1) f|
  double integral_bound_ratio = 0.0;   // weighted LHS over c(beta) |f|_graph^2
  double trace0 = 0.0;                 // conormal trace actually measured at 0
  double graph = 0.0;
};

inline HardyReport hardy_check(const DegenerateOperator& op, const Field& f, double beta) {
  require_space_field(op.mesh, f, "hardy_check");
  if (!(beta > 0.0)) throw InvalidParameter("hardy_check: beta must be positive");
  if (f[0] != 0.0)
    throw HypothesisViolation("hardy_check: f(0) = " + std::to_string(f[0]) +
                              ", needs f to vanish at the degenerate endpoint");

  const GradedMesh& m = op.mesh;
  double a = op.alpha;
  double gn = graph_norm(op, f);
  double trace0 = conormal_trace_at_zero(op, f);
  if (std::abs(trace0) > 1e-2 * std::max(1.0, gn))
    throw HypothesisViolation("hardy_check: conormal trace at 0 is " +
                              std::to_string(trace0) + ", not negligibly small");

  HardyReport r;
  r.trace0 = trace0;
  r.graph = gn;

  double flux_margin = std::numeric_limits<double>::infinity();
  double lhs = 0.0;
  for (int i = 0; i < m.N; ++i) {
    std::size_t k = std::size_t(i);
    double xm = 0.5 * (m.x[k] + m.x[k + 1]);
    double q = (f[k + 1] - f[k]) / m.h[k];
    double flux = op.c[k] * q;
    flux_margin = std::min(flux_margin, gn * std::sqrt(xm) - std::abs(flux));
    double f2m = 0.5 * (f[k] * f[k] + f[k + 1] * f[k + 1]);
    lhs += std::pow(xm, 2.0 * a + beta - 4.0) * f2m * m.h[k];
    lhs += std::pow(xm, 2.0 * a + beta - 2.0) * q * q * m.h[k];
  }

  double cs = 2.0 / (3.0 - 2.0 * a);
  double sol_margin = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= m.N; ++i) {
    std::size_t k = std::size_t(i);
    double lhs_pt = std::abs(std::pow(m.x[k], a - 1.0) * f[k]);
    sol_margin = std::min(sol_margin, cs * gn * std::sqrt(m.x[k]) - lhs_pt);
  }

  if (!std::isfinite(lhs)) throw QuadratureDivergence("hardy_check: weighted integral diverged");

  double cbeta = (1.0 + cs * cs) / beta;
  r.flux_bound_margin = flux_margin;
  r.solution_bound_margin = sol_margin;
  r.integral_bound_ratio = (gn > 0.0) ? lhs / (cbeta * gn * gn) : 0.0;
  return r;
}

struct EigenPair {
  double value = 0.0;  // eigenvalue of -A, positive
  Field mode;          // L2-normalized, mode[1] > 0
};

// Inverse iteration with deflation in the discrete L2 product. The operator
// is 1-D tridiagonal, so each sweep is a single Thomas solve; k stays small.
inline std::vector<EigenPair> eigen_smallest(const DegenerateOperator& op, int k) {
  const GradedMesh& m = op.mesh;
  int N = m.N;
  if (k < 1 || k > N - 1) throw InvalidParameter("eigen_smallest: need 1 <= k <= N-1");
  if (op.bc_left != BoundaryTag::dirichlet || op.bc_right != BoundaryTag::dirichlet)
    throw InvalidParameter("eigen_smallest: needs dirichlet/dirichlet rows");

  std::size_t n = std::size_t(N) - 1;
  std::vector<double> wi(n);
  for (std::size_t i = 0; i < n; ++i) wi[i] = m.w[i + 1];
  auto ip = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += wi[i] * a[i] * b[i];
    return s;
  };

  Tridiag negA;
  negA.lo.resize(n);
  negA.di.resize(n);
  negA.up.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    negA.lo[i] = -op.lo[i];
    negA.di[i] = -op.di[i];
    negA.up[i] = -op.up[i];
  }

  const double pi = 3.14159265358979323846;
  std::vector<EigenPair> out;
  std::vector<std::vector<double>> basis;
  for (int mdx = 0; mdx < k; ++mdx) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::sin((mdx + 1) * pi * m.x[i + 1]);
    double nv = std::sqrt(ip(v, v));
    for (std::size_t i = 0; i < n; ++i) v[i] /= nv;

    double lam = 0.0;
    double res = std::numeric_limits<double>::infinity();
    std::vector<double> y;
    for (int it = 0; it < 200; ++it) {
      for (const auto& u : basis) {
        double pr = ip(v, u);
        for (std::size_t i = 0; i < n; ++i) v[i] -= pr * u[i];
      }
      y = thomas_solve(negA, v);
      for (const auto& u : basis) {
        double pr = ip(y, u);
        for (std::size_t i = 0; i < n; ++i) y[i] -= pr * u[i];
      }
      double ny = std::sqrt(ip(y, y));
      if (!(ny > 0.0) || !std::isfinite(ny))
        throw SolveFailure("eigen_smallest: iterate collapsed");
      for (std::size_t i = 0; i < n; ++i) y[i] /= ny;
      std::vector<double> Ay = negA.apply(y);
      lam = ip(y, Ay);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double d = Ay[i] - lam * y[i];
        s += wi[i] * d * d;
      }
      res = std::sqrt(s);
      v = y;
      if (res <= 1e-12 * std::max(1.0, std::abs(lam))) break;
    }
    if (!(res <= 1e-6 * std::max(1.0, std::abs(lam))))
      throw SolveFailure("eigen_smallest: inverse iteration did not converge");

    EigenPair ep;
    ep.value = lam;
    ep.mode.assign(std::size_t(N) + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) ep.mode[i + 1] = y[i];
    if (ep.mode[1] < 0.0)
      for (double& z : ep.mode) z = -z;
    out.push_back(std::move(ep));
    // re-extract the interior part with the fixed sign for deflation
    std::vector<double> yb(n);
    for (std::size_t i = 0; i < n; ++i) yb[i] = out.back().mode[i + 1];
    basis.push_back(std::move(yb));
  }
  return out;
}

}  // namespace degparab
