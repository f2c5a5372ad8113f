#pragma once

#include <functional>
#include <vector>

#include "mmoc/space.hpp"

namespace mmoc::fem {

/// Coefficient vector over a function space; time_tag is the simulation time
/// the field represents (Dirichlet entries match the boundary data there).
struct ScalarField {
  const FunctionSpace* space = nullptr;
  std::vector<double> coeffs;
  double time_tag = 0.0;

  ScalarField() = default;
  explicit ScalarField(const FunctionSpace& s, double t = 0.0)
      : space(&s), coeffs(static_cast<std::size_t>(s.dof_count()), 0.0), time_tag(t) {}

  double& operator[](std::int64_t i) { return coeffs[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return coeffs[static_cast<std::size_t>(i)]; }
};

/// dim() scalar components over one shared space.
struct VectorField {
  const FunctionSpace* space = nullptr;
  std::array<ScalarField, 3> component;
  double time_tag = 0.0;

  VectorField() = default;
  explicit VectorField(const FunctionSpace& s, double t = 0.0) : space(&s), time_tag(t) {
    for (int c = 0; c < s.dim(); ++c) component[static_cast<std::size_t>(c)] = ScalarField(s, t);
  }

  int dim() const { return space->dim(); }
  Vec3 at_dof(std::int64_t i) const {
    Vec3 v{component[0][i], component[1][i], 0.0};
    if (dim() == 3) v.z = component[2][i];
    return v;
  }
};

using ScalarFunction = std::function<double(const Vec3&)>;
using VectorFunction = std::function<Vec3(const Vec3&)>;

/// Nodal interpolation: coefficient i = f(physical DoF coordinate).
ScalarField interpolate(const ScalarFunction& f, const FunctionSpace& space, double time_tag = 0.0);
VectorField interpolate(const VectorFunction& f, const FunctionSpace& space, double time_tag = 0.0);

/// Restrict a field to the finest-level micro-vertices (for output).
std::vector<double> restrict_to_level_vertices(const ScalarField& f);

}  // namespace mmoc::fem
