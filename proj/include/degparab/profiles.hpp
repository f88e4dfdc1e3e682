#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "degparab/errors.hpp"
#include "degparab/operator.hpp"

namespace degparab {

// Deterministic 64-bit generator (SplitMix64). Used instead of the standard
// distributions so that a seed pins the exact stream on every platform.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
};

namespace detail {

inline std::vector<std::string> split_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) parts.push_back("");
  return parts;
}

inline double spec_arg(const std::vector<std::string>& parts, std::size_t idx, double fallback) {
  if (idx >= parts.size() || parts[idx].empty()) return fallback;
  try {
    return std::stod(parts[idx]);
  } catch (const std::exception&) {
    throw ConfigError("profile: bad numeric argument '" + parts[idx] + "'");
  }
}

inline std::vector<std::pair<double, double>> read_two_column_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("profile: cannot open csv " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (first) {  // header row
      first = false;
      continue;
    }
    std::size_t comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("profile: malformed csv row in " + path);
    try {
      rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ConfigError("profile: non-numeric csv row in " + path);
    }
  }
  return rows;
}

}  // namespace detail

// Builtin space-profile catalog. Forms:
//   zero | one | eigenmode:k[:scale] | bump[:center[:width]] |
//   poly:a:b[:scale] (x^a (1-x)^b) | sinpi[:scale] | random[:scale] | csv:path
// random is a seeded low-mode sine sum vanishing at both endpoints.
inline Field space_profile(const std::string& spec, const DegenerateOperator& op,
                           std::uint64_t seed) {
  const GradedMesh& m = op.mesh;
  auto parts = detail::split_spec(spec);
  const std::string& name = parts[0];
  const double pi = 3.14159265358979323846;
  Field f(std::size_t(m.N) + 1, 0.0);

  if (name == "zero") {
    return f;
  } else if (name == "one") {
    for (double& v : f) v = 1.0;
    return f;
  } else if (name == "eigenmode") {
    int k = int(detail::spec_arg(parts, 1, 1.0));
    double scale = detail::spec_arg(parts, 2, 1.0);
    auto pairs = eigen_smallest(op, k);
    f = pairs[std::size_t(k) - 1].mode;
    for (double& v : f) v *= scale;
    return f;
  } else if (name == "bump") {
    double c = detail::spec_arg(parts, 1, 0.5);
    double w = detail::spec_arg(parts, 2, 0.25);
    if (!(w > 0.0)) throw ConfigError("profile: bump width must be positive");
    for (int i = 0; i <= m.N; ++i) {
      double r = (m.x[std::size_t(i)] - c) / w;
      if (std::abs(r) < 1.0) f[std::size_t(i)] = std::exp(1.0 - 1.0 / (1.0 - r * r));
    }
    return f;
  } else if (name == "poly") {
    if (parts.size() < 3) throw ConfigError("profile: poly needs two exponents");
    double a = detail::spec_arg(parts, 1, 2.0);
    double b = detail::spec_arg(parts, 2, 2.0);
    double scale = detail::spec_arg(parts, 3, 1.0);
    for (int i = 0; i <= m.N; ++i) {
      double x = m.x[std::size_t(i)];
      f[std::size_t(i)] = scale * std::pow(x, a) * std::pow(1.0 - x, b);
    }
    return f;
  } else if (name == "sinpi") {
    double scale = detail::spec_arg(parts, 1, 1.0);
    for (int i = 0; i <= m.N; ++i) f[std::size_t(i)] = scale * std::sin(pi * m.x[std::size_t(i)]);
    f[0] = 0.0;
    f[std::size_t(m.N)] = 0.0;
    return f;
  } else if (name == "random") {
    double scale = detail::spec_arg(parts, 1, 1.0);
    SplitMix64 rng(seed);
    double coef[6];
    for (double& cc : coef) cc = rng.uniform(-1.0, 1.0);
    for (int i = 0; i <= m.N; ++i) {
      double x = m.x[std::size_t(i)], v = 0.0;
      for (int k = 1; k <= 6; ++k) v += coef[k - 1] / (k * k) * std::sin(k * pi * x);
      f[std::size_t(i)] = scale * v;
    }
    f[0] = 0.0;
    f[std::size_t(m.N)] = 0.0;
    return f;
  } else if (name == "csv") {
    if (parts.size() < 2) throw ConfigError("profile: csv needs a path");
    // path may contain ':'; rejoin the remainder
    std::string path = spec.substr(4);
    auto rows = detail::read_two_column_csv(path);
    if (int(rows.size()) != m.N + 1)
      throw ConfigError("profile: csv row count does not match the mesh");
    for (int i = 0; i <= m.N; ++i) {
      if (std::abs(rows[std::size_t(i)].first - m.x[std::size_t(i)]) > 1e-12)
        throw ConfigError("profile: csv nodes do not match the mesh");
      f[std::size_t(i)] = rows[std::size_t(i)].second;
    }
    return f;
  }
  throw ConfigError("profile: unknown space profile '" + name + "'");
}

// Builtin time-profile catalog for boundary controls. Forms:
//   zero | sinsq[:scale] | random[:scale] | csv:path
// Every builtin vanishes exactly at t = 0 and t = T.
inline std::vector<double> time_profile(const std::string& spec, const GradedMesh& m,
                                        std::uint64_t seed) {
  auto parts = detail::split_spec(spec);
  const std::string& name = parts[0];
  const double pi = 3.14159265358979323846;
  std::vector<double> g(std::size_t(m.M) + 1, 0.0);

  if (name == "zero") {
    return g;
  } else if (name == "sinsq") {
    double scale = detail::spec_arg(parts, 1, 1.0);
    for (int j = 0; j <= m.M; ++j) {
      double sv = std::sin(pi * m.t[std::size_t(j)] / m.T);
      g[std::size_t(j)] = scale * sv * sv;
    }
    g[0] = 0.0;
    g[std::size_t(m.M)] = 0.0;
    return g;
  } else if (name == "random") {
    double scale = detail::spec_arg(parts, 1, 1.0);
    SplitMix64 rng(seed ^ 0x5bf03635u);
    double coef[6];
    for (double& cc : coef) cc = rng.uniform(-1.0, 1.0);
    for (int j = 0; j <= m.M; ++j) {
      double tt = m.t[std::size_t(j)] / m.T;
      double env = std::sin(pi * tt);
      double v = 0.0;
      for (int k = 1; k <= 6; ++k) v += coef[k - 1] / (k * k) * std::sin(k * pi * tt);
      g[std::size_t(j)] = scale * env * env * v;
    }
    g[0] = 0.0;
    g[std::size_t(m.M)] = 0.0;
    return g;
  } else if (name == "csv") {
    if (parts.size() < 2) throw ConfigError("profile: csv needs a path");
    std::string path = spec.substr(4);
    auto rows = detail::read_two_column_csv(path);
    if (int(rows.size()) != m.M + 1)
      throw ConfigError("profile: csv row count does not match the time grid");
    for (int j = 0; j <= m.M; ++j) {
      if (std::abs(rows[std::size_t(j)].first - m.t[std::size_t(j)]) > 1e-12)
        throw ConfigError("profile: csv time nodes do not match the grid");
      g[std::size_t(j)] = rows[std::size_t(j)].second;
    }
    return g;
  }
  throw ConfigError("profile: unknown time profile '" + name + "'");
}

}  // namespace degparab
