#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "degparab/errors.hpp"

namespace degparab {

// Space-only grid function: one value per spatial node, size N+1.
using Field = std::vector<double>;

// Space-time grid function, time-major: value(j, i) is node i at time level j.
struct SpaceTimeField {
  int N = 0;
  int M = 0;
  std::vector<double> data;

  SpaceTimeField() = default;
  SpaceTimeField(int n, int m) : N(n), M(m), data(std::size_t(n + 1) * (m + 1), 0.0) {}

  double& at(int j, int i) { return data[std::size_t(j) * (N + 1) + i]; }
  double at(int j, int i) const { return data[std::size_t(j) * (N + 1) + i]; }

  // View of time level j as a Field copy.
  Field row(int j) const {
    return Field(data.begin() + std::ptrdiff_t(j) * (N + 1),
                 data.begin() + std::ptrdiff_t(j + 1) * (N + 1));
  }

  void set_row(int j, const Field& f) {
    for (int i = 0; i <= N; ++i) at(j, i) = f[std::size_t(i)];
  }
};

// Spatial grid x_i = (i/N)^gamma on [0,1], graded toward the degenerate end
// x = 0, together with the uniform time grid t_j = j T / M.
struct GradedMesh {
  int N = 0;        // space cells
  double gamma = 1.0;
  int M = 0;        // time steps
  double T = 1.0;
  double dt = 0.0;

  std::vector<double> x;  // N+1 nodes, x[0] == 0 and x[N] == 1 exactly
  std::vector<double> t;  // M+1 nodes
  std::vector<double> h;  // cell widths, size N
  std::vector<double> w;  // dual cell widths, size N+1; these are the
                          // trapezoid node weights of the discrete L2 product
};

inline GradedMesh build_graded_mesh(int N, double gamma, int M, double T) {
  if (N < 4) throw InvalidParameter("build_graded_mesh: need N >= 4");
  if (M < 4) throw InvalidParameter("build_graded_mesh: need M >= 4");
  if (!(T > 0.0)) throw InvalidParameter("build_graded_mesh: need T > 0");
  if (!(gamma >= 1.0)) throw InvalidParameter("build_graded_mesh: need gamma >= 1");

  GradedMesh m;
  m.N = N;
  m.gamma = gamma;
  m.M = M;
  m.T = T;
  m.dt = T / M;

  m.x.resize(std::size_t(N) + 1);
  for (int i = 0; i <= N; ++i) {
    double r = double(i) / N;
    // gamma == 1 must reproduce the uniform mesh bitwise, so skip pow there.
    m.x[std::size_t(i)] = (gamma == 1.0) ? r : std::pow(r, gamma);
  }
  m.x[0] = 0.0;
  m.x[std::size_t(N)] = 1.0;

  m.t.resize(std::size_t(M) + 1);
  for (int j = 0; j <= M; ++j) m.t[std::size_t(j)] = m.dt * j;
  m.t[std::size_t(M)] = T;

  m.h.resize(std::size_t(N));
  for (int i = 0; i < N; ++i) {
    m.h[std::size_t(i)] = m.x[std::size_t(i) + 1] - m.x[std::size_t(i)];
    if (!(m.h[std::size_t(i)] > 0.0))
      throw InvalidParameter("build_graded_mesh: non-positive cell width");
  }

  m.w.resize(std::size_t(N) + 1);
  m.w[0] = m.h[0] / 2.0;
  m.w[std::size_t(N)] = m.h[std::size_t(N) - 1] / 2.0;
  for (int i = 1; i < N; ++i)
    m.w[std::size_t(i)] = (m.h[std::size_t(i) - 1] + m.h[std::size_t(i)]) / 2.0;

  return m;
}

inline void require_space_field(const GradedMesh& m, const Field& f, const char* where) {
  if (int(f.size()) != m.N + 1)
    throw MeshMismatch(std::string(where) + ": field size does not match mesh");
}

inline void require_time_seq(const GradedMesh& m, const std::vector<double>& g, const char* where) {
  if (int(g.size()) != m.M + 1)
    throw MeshMismatch(std::string(where) + ": time sequence size does not match mesh");
}

}  // namespace degparab
