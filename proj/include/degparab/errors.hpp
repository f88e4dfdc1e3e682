#pragma once

#include <stdexcept>
#include <string>

namespace degparab {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad constructor/operation argument (sizes, ranges, signs).
struct InvalidParameter : Error {
  using Error::Error;
};

// A grid function does not live on the mesh an operation expects.
struct MeshMismatch : Error {
  using Error::Error;
};

// alpha outside [0,1); the strongly degenerate regime is not handled here.
struct UnsupportedRegime : Error {
  using Error::Error;
};

// An analytic hypothesis of a checker is violated by the supplied data.
struct HypothesisViolation : Error {
  using Error::Error;
};

// Weighted quadrature produced a non-finite value, or the weight exponent
// is too singular for the supplied integrand.
struct QuadratureDivergence : Error {
  using Error::Error;
};

// (alpha, beta) outside the admissible window; carries the full report text.
struct AdmissibilityError : Error {
  using Error::Error;
};

// Linear algebra failure: zero pivot, non-finite iterate, no convergence.
struct SolveFailure : Error {
  using Error::Error;
};

// Malformed or inconsistent experiment configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace degparab
