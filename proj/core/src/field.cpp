#include "mmoc/field.hpp"

namespace mmoc::fem {

ScalarField interpolate(const ScalarFunction& f, const FunctionSpace& space, double time_tag) {
  ScalarField out(space, time_tag);
  for (std::int64_t i = 0; i < space.dof_count(); ++i) out[i] = f(space.dof_coord(i));
  return out;
}

VectorField interpolate(const VectorFunction& f, const FunctionSpace& space, double time_tag) {
  VectorField out(space, time_tag);
  for (std::int64_t i = 0; i < space.dof_count(); ++i) {
    const Vec3 v = f(space.dof_coord(i));
    for (int c = 0; c < space.dim(); ++c) out.component[static_cast<std::size_t>(c)][i] = v[c];
  }
  return out;
}

std::vector<double> restrict_to_level_vertices(const ScalarField& f) {
  const auto& map = f.space->level_vertex_dofs();
  std::vector<double> out(map.size());
  for (std::size_t v = 0; v < map.size(); ++v) out[v] = f[map[v]];
  return out;
}

}  // namespace mmoc::fem
