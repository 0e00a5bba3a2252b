#pragma once

#include <stdexcept>
#include <string>

namespace fiberopt {

/// Tensor inversion hit a condition-number bound or an exactly singular matrix.
struct SingularTensor : std::runtime_error {
  explicit SingularTensor(const std::string& what) : std::runtime_error(what) {}
};

/// Material parameters violate their admissible ranges.
struct InvalidMaterial : std::runtime_error {
  explicit InvalidMaterial(const std::string& what) : std::runtime_error(what) {}
};

/// Sparse factorization or linear solve failed.
struct SolverFailure : std::runtime_error {
  explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Adaptive quadrature failed to reach its tolerance within the refinement budget.
struct QuadratureFailure : std::runtime_error {
  explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Smoothed phase fractions lost normalizability (sum of unnormalized fractions ~ 0).
struct DegenerateFraction : std::runtime_error {
  explicit DegenerateFraction(const std::string& what) : std::runtime_error(what) {}
};

/// Config file syntax error; carries 1-based line/column of the offending token.
struct ParseError : std::runtime_error {
  int line = 0;
  int col = 0;
  ParseError(const std::string& what, int line_, int col_)
      : std::runtime_error(what + " (line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ")"),
        line(line_), col(col_) {}
};

/// Config value out of range or unknown key; carries the offending key name.
struct ValidationError : std::runtime_error {
  std::string key;
  ValidationError(const std::string& key_, const std::string& what)
      : std::runtime_error("config key '" + key_ + "': " + what), key(key_) {}
};

/// Filesystem/IO failure while reading or writing artifacts.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fiberopt
