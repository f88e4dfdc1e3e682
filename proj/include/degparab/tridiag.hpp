#pragma once

#include <cmath>
#include <vector>

#include "degparab/errors.hpp"

namespace degparab {

// Tridiagonal system rows: lo[0] and up[n-1] are ignored.
struct Tridiag {
  std::vector<double> lo, di, up;

  std::size_t size() const { return di.size(); }

  // y = T x
  std::vector<double> apply(const std::vector<double>& x) const {
    std::size_t n = size();
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double v = di[i] * x[i];
      if (i > 0) v += lo[i] * x[i - 1];
      if (i + 1 < n) v += up[i] * x[i + 1];
      y[i] = v;
    }
    return y;
  }
};

// Thomas algorithm. The callers only pass diagonally dominant systems, but a
// vanishing pivot is still reported instead of propagating NaNs.
inline std::vector<double> thomas_solve(const Tridiag& A, const std::vector<double>& rhs) {
  std::size_t n = A.size();
  if (n == 0 || A.lo.size() != n || A.up.size() != n || rhs.size() != n)
    throw InvalidParameter("thomas_solve: inconsistent band sizes");
  std::vector<double> c(n), d(n);
  if (A.di[0] == 0.0 || !std::isfinite(A.di[0]))
    throw SolveFailure("thomas_solve: bad leading pivot");
  c[0] = A.up[0] / A.di[0];
  d[0] = rhs[0] / A.di[0];
  for (std::size_t i = 1; i < n; ++i) {
    double piv = A.di[i] - A.lo[i] * c[i - 1];
    if (piv == 0.0 || !std::isfinite(piv))
      throw SolveFailure("thomas_solve: zero or non-finite pivot");
    c[i] = A.up[i] / piv;
    d[i] = (rhs[i] - A.lo[i] * d[i - 1]) / piv;
  }
  std::vector<double> out(n);
  out[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) out[i] = d[i] - c[i] * out[i + 1];
  return out;
}

}  // namespace degparab
