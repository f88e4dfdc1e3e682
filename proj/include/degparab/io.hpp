#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "degparab/evolution.hpp"

namespace degparab {

using json = nlohmann::ordered_json;

// Full-precision decimal rendering; round-trips every finite double.
inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

// All output files are written to a sibling temp file first and renamed into
// place, so readers never observe a half-written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("write_file_atomic: cannot open " + tmp.string());
    os << content;
    if (!os) throw Error("write_file_atomic: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_json_atomic(const std::filesystem::path& path, const json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

inline std::string space_csv(const GradedMesh& m, const Field& f) {
  std::string out = "x,value\n";
  for (int i = 0; i <= m.N; ++i)
    out += fmt17(m.x[std::size_t(i)]) + "," + fmt17(f[std::size_t(i)]) + "\n";
  return out;
}

inline std::string spacetime_csv(const GradedMesh& m, const SpaceTimeField& U) {
  std::string out = "x,t,value\n";
  out.reserve(out.size() + std::size_t(m.N + 1) * std::size_t(m.M + 1) * 24);
  for (int j = 0; j <= m.M; ++j)
    for (int i = 0; i <= m.N; ++i)
      out += fmt17(m.x[std::size_t(i)]) + "," + fmt17(m.t[std::size_t(j)]) + "," +
             fmt17(U.at(j, i)) + "\n";
  return out;
}

inline std::string trace_csv(const GradedMesh& m, const std::vector<double>& psi) {
  std::string out = "t,conormal_trace\n";
  for (int j = 0; j <= m.M; ++j)
    out += fmt17(m.t[std::size_t(j)]) + "," + fmt17(psi[std::size_t(j)]) + "\n";
  return out;
}

inline std::string control_csv(const GradedMesh& m, const std::vector<double>& g) {
  std::string out = "t,g\n";
  for (int j = 0; j <= m.M; ++j)
    out += fmt17(m.t[std::size_t(j)]) + "," + fmt17(g[std::size_t(j)]) + "\n";
  return out;
}

// Debug dump of the tridiagonal interior rows.
inline std::string operator_csv(const DegenerateOperator& op) {
  std::string out = "i,lower,diag,upper\n";
  for (std::size_t k = 0; k < op.lo.size(); ++k)
    out += std::to_string(k + 1) + "," + fmt17(op.lo[k]) + "," + fmt17(op.di[k]) + "," +
           fmt17(op.up[k]) + "\n";
  return out;
}

}  // namespace degparab
