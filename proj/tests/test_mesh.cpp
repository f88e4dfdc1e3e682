#include <catch_amalgamated.hpp>

#include <cmath>

#include "degparab/mesh.hpp"
#include "degparab/quadrature.hpp"
#include "oracles.hpp"

using namespace degparab;

TEST_CASE("graded mesh endpoints and widths", "[mesh]") {
  GradedMesh m = build_graded_mesh(100, 2.0, 50, 1.0);
  REQUIRE(m.x[0] == 0.0);
  REQUIRE(m.x[100] == 1.0);
  REQUIRE(m.t[0] == 0.0);
  REQUIRE(m.t[50] == 1.0);
  for (int i = 0; i < 100; ++i) REQUIRE(m.x[std::size_t(i)] < m.x[std::size_t(i) + 1]);

  double hsum = 0.0, wsum = 0.0;
  for (double h : m.h) hsum += h;
  for (double w : m.w) wsum += w;
  REQUIRE(hsum == Catch::Approx(1.0).margin(1e-14));
  REQUIRE(wsum == Catch::Approx(1.0).margin(1e-14));

  // grading law x_i = (i/N)^2
  REQUIRE(m.x[50] == Catch::Approx(0.25).margin(1e-15));
}

TEST_CASE("gamma = 1 gives the uniform mesh exactly", "[mesh]") {
  GradedMesh m = build_graded_mesh(64, 1.0, 8, 2.0);
  for (int i = 0; i < 64; ++i)
    REQUIRE(m.h[std::size_t(i)] == Catch::Approx(1.0 / 64).margin(1e-16));
  REQUIRE(m.dt == Catch::Approx(0.25).margin(0.0));
}

TEST_CASE("mesh parameter validation", "[mesh]") {
  REQUIRE_THROWS_AS(build_graded_mesh(3, 2.0, 10, 1.0), InvalidParameter);
  REQUIRE_THROWS_AS(build_graded_mesh(10, 2.0, 2, 1.0), InvalidParameter);
  REQUIRE_THROWS_AS(build_graded_mesh(10, 2.0, 10, -1.0), InvalidParameter);
  REQUIRE_THROWS_AS(build_graded_mesh(10, 0.5, 10, 1.0), InvalidParameter);
}

TEST_CASE("field size guards", "[mesh]") {
  GradedMesh m = build_graded_mesh(10, 2.0, 10, 1.0);
  Field wrong(5, 0.0);
  REQUIRE_THROWS_AS(require_space_field(m, wrong, "test"), MeshMismatch);
  std::vector<double> wrongt(3, 0.0);
  REQUIRE_THROWS_AS(require_time_seq(m, wrongt, "test"), MeshMismatch);
}

TEST_CASE("space-time field indexing round trip", "[mesh]") {
  SpaceTimeField F(4, 3);
  F.at(2, 1) = 7.5;
  REQUIRE(F.at(2, 1) == 7.5);
  Field r = F.row(2);
  REQUIRE(r.size() == 5);
  REQUIRE(r[1] == 7.5);
  Field put = {1, 2, 3, 4, 5};
  F.set_row(3, put);
  REQUIRE(F.at(3, 4) == 5.0);
  REQUIRE(F.at(2, 1) == 7.5);
}

TEST_CASE("discrete L2 product is the trapezoid rule", "[quadrature]") {
  GradedMesh m = build_graded_mesh(400, 1.0, 8, 1.0);
  Field f(401), g(401);
  for (int i = 0; i <= 400; ++i) {
    double x = m.x[std::size_t(i)];
    f[std::size_t(i)] = x;
    g[std::size_t(i)] = 1.0 - x;
  }
  // trapezoid is exact up to quadratics' curvature term: analytic 1/6
  REQUIRE(l2_ip(m, f, g) == Catch::Approx(1.0 / 6.0).epsilon(1e-4));
  REQUIRE(l2_ip(m, f, g) == l2_ip(m, g, f));
  REQUIRE(l2_norm(m, f) == Catch::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-4));
}

TEST_CASE("weighted integral with singular exponent", "[quadrature]") {
  GradedMesh m = build_graded_mesh(400, 2.0, 8, 1.0);
  Field f(401);
  for (int i = 0; i <= 400; ++i) f[std::size_t(i)] = m.x[std::size_t(i)] * m.x[std::size_t(i)];
  // integral of x^{-1/2} x^2 = 2/5
  double got = weighted_integral(m, f, -0.5);
  REQUIRE(std::abs(got - 0.4) <= 1e-5);
}

TEST_CASE("weighted integral refinement order", "[quadrature]") {
  double err[3];
  int Ns[3] = {100, 200, 400};
  for (int k = 0; k < 3; ++k) {
    GradedMesh m = build_graded_mesh(Ns[k], 2.0, 8, 1.0);
    Field f(std::size_t(Ns[k]) + 1);
    for (int i = 0; i <= Ns[k]; ++i)
      f[std::size_t(i)] = m.x[std::size_t(i)] * m.x[std::size_t(i)];
    err[k] = std::abs(weighted_integral(m, f, -0.5) - 0.4);
  }
  for (int k = 0; k + 1 < 3; ++k) {
    if (err[k + 1] <= 1e-14) continue;  // hit rounding floor
    REQUIRE(err[k] / err[k + 1] >= 3.0);
    REQUIRE(err[k] / err[k + 1] <= 5.0);
  }
}

TEST_CASE("weighted integral agrees with a Gauss oracle", "[quadrature][oracle]") {
  GradedMesh m = build_graded_mesh(400, 2.0, 8, 1.0);
  const double pi = 3.14159265358979323846;
  Field f(401);
  for (int i = 0; i <= 400; ++i) f[std::size_t(i)] = std::sin(pi * m.x[std::size_t(i)]);
  double ref = oracles::weighted_integral([pi](double x) { return std::sin(pi * x); }, -0.3);
  double got = weighted_integral(m, f, -0.3);
  REQUIRE(std::abs(got - ref) / std::abs(ref) <= 1e-4);
}

TEST_CASE("weighted integral divergence guard", "[quadrature]") {
  GradedMesh m = build_graded_mesh(50, 2.0, 8, 1.0);
  Field ones(51, 1.0);
  REQUIRE_THROWS_AS(weighted_integral(m, ones, -1.0), QuadratureDivergence);
  Field vanishes(51, 1.0);
  vanishes[0] = 0.0;
  REQUIRE_NOTHROW(weighted_integral(m, vanishes, -1.0));
}

TEST_CASE("time H1_0 pairing against the closed form", "[quadrature]") {
  int M = 200;
  double T = 1.0;
  const double pi = 3.14159265358979323846;
  std::vector<double> g(std::size_t(M) + 1);
  for (int j = 0; j <= M; ++j) {
    double sv = std::sin(pi * j * T / M / T);
    g[std::size_t(j)] = sv * sv;
  }
  // derivative of sin^2(pi t / T) has squared integral pi^2 / (2 T)
  double got = h10_ip(g, g, T / M);
  REQUIRE(got == Catch::Approx(pi * pi / (2.0 * T)).epsilon(1e-3));
  REQUIRE_THROWS_AS(h10_ip(g, std::vector<double>(3, 0.0), T / M), InvalidParameter);
}
