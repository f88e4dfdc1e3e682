#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "degparab/errors.hpp"
#include "degparab/evolution.hpp"

namespace degparab {

// Flat INI-style experiment description. Sections mirror the library layers;
// every key has a default so a config only states what it changes. Unknown
// sections or keys are rejected rather than silently ignored.
struct ExperimentConfig {
  // [problem]
  double alpha = 0.5;
  double T = 1.0;
  // [mesh]
  int N = 200;
  double gamma = 2.0;
  int M = 200;
  // [scheme]
  Scheme scheme = Scheme::crank_nicolson;
  // [carleman]
  double beta = 0.6;
  std::vector<double> s_list = {2.0, 4.0, 8.0, 16.0, 32.0};
  std::string variant = "theorem";        // theorem | corollary
  std::string carleman_v = "manufactured";  // manufactured | adjoint:<space profile>
  // [control]
  double rho = 1e-2;
  double rho_min = 1e-8;
  double epsilon = 0.0;
  int max_iters = 400;
  double grad_tol = 1e-10;
  std::string control_mode = "standard";  // standard | two_stage
  // [data]
  std::string u0 = "zero";
  std::string uT = "zero";
  std::string g = "zero";
  std::string v = "zero";
  // [output]
  std::string output_dir = "out";
  // top level
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value '" + v + "' for " + key);
  }
}

inline int parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return int(d);
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value '" + v + "' for " + key);
  }
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    unsigned long long d = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return std::uint64_t(d);
  } catch (const std::exception&) {
    throw ConfigError("config: bad seed value '" + v + "' for " + key);
  }
}

inline std::vector<double> parse_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(item, key));
  }
  if (out.empty()) throw ConfigError("config: empty list for " + key);
  return out;
}

}  // namespace detail

inline Scheme parse_scheme(const std::string& s) {
  if (s == "crank_nicolson") return Scheme::crank_nicolson;
  if (s == "implicit_euler") return Scheme::implicit_euler;
  throw ConfigError("config: unknown scheme '" + s + "'");
}

inline std::string scheme_name(Scheme s) {
  return s == Scheme::crank_nicolson ? "crank_nicolson" : "implicit_euler";
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: malformed section header at line " + std::to_string(lineno));
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "problem" && section != "mesh" && section != "scheme" &&
          section != "carleman" && section != "control" && section != "data" &&
          section != "output")
        throw ConfigError("config: unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
    std::string key = detail::trim(line.substr(0, eq));
    std::string val = detail::trim(line.substr(eq + 1));
    std::string qual = section.empty() ? key : section + "." + key;

    if (qual == "seed") cfg.seed = detail::parse_u64(val, qual);
    else if (qual == "problem.alpha") cfg.alpha = detail::parse_double(val, qual);
    else if (qual == "problem.T") cfg.T = detail::parse_double(val, qual);
    else if (qual == "mesh.N") cfg.N = detail::parse_int(val, qual);
    else if (qual == "mesh.gamma") cfg.gamma = detail::parse_double(val, qual);
    else if (qual == "mesh.M") cfg.M = detail::parse_int(val, qual);
    else if (qual == "scheme.method") cfg.scheme = parse_scheme(val);
    else if (qual == "carleman.beta") cfg.beta = detail::parse_double(val, qual);
    else if (qual == "carleman.s_list") cfg.s_list = detail::parse_list(val, qual);
    else if (qual == "carleman.variant") {
      if (val != "theorem" && val != "corollary")
        throw ConfigError("config: carleman.variant must be theorem or corollary");
      cfg.variant = val;
    } else if (qual == "carleman.v") cfg.carleman_v = val;
    else if (qual == "control.rho") cfg.rho = detail::parse_double(val, qual);
    else if (qual == "control.rho_min") cfg.rho_min = detail::parse_double(val, qual);
    else if (qual == "control.epsilon") cfg.epsilon = detail::parse_double(val, qual);
    else if (qual == "control.max_iters") cfg.max_iters = detail::parse_int(val, qual);
    else if (qual == "control.grad_tol") cfg.grad_tol = detail::parse_double(val, qual);
    else if (qual == "control.mode") {
      if (val != "standard" && val != "two_stage")
        throw ConfigError("config: control.mode must be standard or two_stage");
      cfg.control_mode = val;
    } else if (qual == "data.u0") cfg.u0 = val;
    else if (qual == "data.uT") cfg.uT = val;
    else if (qual == "data.g") cfg.g = val;
    else if (qual == "data.v") cfg.v = val;
    else if (qual == "output.dir") cfg.output_dir = val;
    else throw ConfigError("config: unknown key '" + qual + "'");
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

// Canonical rendering: parse(serialize(c)) reproduces c field for field.
inline std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "seed = " << c.seed << "\n\n";
  os << "[problem]\n" << "alpha = " << c.alpha << "\n" << "T = " << c.T << "\n\n";
  os << "[mesh]\n" << "N = " << c.N << "\n" << "gamma = " << c.gamma << "\n"
     << "M = " << c.M << "\n\n";
  os << "[scheme]\n" << "method = " << scheme_name(c.scheme) << "\n\n";
  os << "[carleman]\n" << "beta = " << c.beta << "\n" << "s_list = ";
  for (std::size_t i = 0; i < c.s_list.size(); ++i)
    os << (i ? "," : "") << c.s_list[i];
  os << "\n" << "variant = " << c.variant << "\n" << "v = " << c.carleman_v << "\n\n";
  os << "[control]\n" << "rho = " << c.rho << "\n" << "rho_min = " << c.rho_min << "\n"
     << "epsilon = " << c.epsilon << "\n" << "max_iters = " << c.max_iters << "\n"
     << "grad_tol = " << c.grad_tol << "\n" << "mode = " << c.control_mode << "\n\n";
  os << "[data]\n" << "u0 = " << c.u0 << "\n" << "uT = " << c.uT << "\n"
     << "g = " << c.g << "\n" << "v = " << c.v << "\n\n";
  os << "[output]\n" << "dir = " << c.output_dir << "\n";
  return os.str();
}

}  // namespace degparab
