#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mmoc/geometry.hpp"

namespace mmoc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or malformed input (bad mesh file, R > #volumes, ...).
struct ConfigError : Error {
  using Error::Error;
};

/// Degenerate or inverted geometry, carries the offending element index.
struct GeometryError : Error {
  GeometryError(const std::string& msg, long long element)
      : Error(msg + " (element " + std::to_string(element) + ")"), element_index(element) {}
  long long element_index;
};

/// Point outside the domain beyond the admissible tolerance.
struct OutOfDomainError : Error {
  OutOfDomainError(const std::string& msg, const Vec3& p)
      : Error(msg + " at (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " +
              std::to_string(p.z) + ")"),
        point(p) {}
  Vec3 point;
};

/// Iterative solver failed to reach tolerance; keeps the residual history.
struct SolverError : Error {
  SolverError(const std::string& msg, std::vector<double> residuals)
      : Error(msg), residual_history(std::move(residuals)) {}
  std::vector<double> residual_history;
};

}  // namespace mmoc
