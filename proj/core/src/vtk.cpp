#include "mmoc/vtk.hpp"

#include <fstream>

#include "mmoc/error.hpp"

namespace mmoc::fem {

namespace {

std::ofstream open_grid(const std::string& path, const mesh::MeshHierarchy& h,
                        std::size_t* out_npoints) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f.precision(16);
  const auto& level = h.finest();
  const int dim = h.dim();
  f << "# vtk DataFile Version 3.0\nfield dump\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << level.vertex_count() << " double\n";
  for (const auto& v : level.vertices_phys) f << v.x << ' ' << v.y << ' ' << v.z << '\n';
  const int per = dim + 1;
  f << "CELLS " << level.element_count() << ' ' << level.element_count() * (per + 1) << '\n';
  for (const auto& e : level.elements) {
    f << per;
    for (int c = 0; c < per; ++c) f << ' ' << e[static_cast<std::size_t>(c)];
    f << '\n';
  }
  f << "CELL_TYPES " << level.element_count() << '\n';
  for (std::size_t e = 0; e < level.element_count(); ++e) f << (dim == 2 ? 5 : 10) << '\n';
  f << "POINT_DATA " << level.vertex_count() << '\n';
  *out_npoints = level.vertex_count();
  return f;
}

}  // namespace

void write_vtk(const std::string& path, const mesh::MeshHierarchy& h, const std::string& name,
               const ScalarField& field) {
  std::size_t n = 0;
  auto f = open_grid(path, h, &n);
  const auto values = restrict_to_level_vertices(field);
  f << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (const auto v : values) f << v << '\n';
}

void write_vtk(const std::string& path, const mesh::MeshHierarchy& h, const std::string& name,
               const VectorField& field) {
  std::size_t n = 0;
  auto f = open_grid(path, h, &n);
  std::array<std::vector<double>, 3> comp;
  for (int c = 0; c < field.dim(); ++c)
    comp[static_cast<std::size_t>(c)] =
        restrict_to_level_vertices(field.component[static_cast<std::size_t>(c)]);
  f << "VECTORS " << name << " double\n";
  for (std::size_t i = 0; i < n; ++i)
    f << comp[0][i] << ' ' << comp[1][i] << ' ' << (field.dim() == 3 ? comp[2][i] : 0.0) << '\n';
}

}  // namespace mmoc::fem
