#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mmoc/geometry.hpp"

namespace mmoc::mesh {

enum class BoundaryTag : std::uint8_t { Dirichlet, Neumann, FreeSlip, NoSlip, Interior };

std::string to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(const std::string& s);

/// A boundary facet of the coarse mesh: an edge (2D) or a triangle (3D).
struct BoundaryFacet {
  std::array<std::int64_t, 3> vertices{-1, -1, -1};  // last entry unused in 2D
  BoundaryTag tag = BoundaryTag::Interior;
};

/// Unstructured conforming simplex mesh: the level-0 grid of the hierarchy.
/// Elements are triangles (dim 2) or tetrahedra (dim 3); index -1 pads 2D tuples.
struct CoarseMesh {
  int dim = 2;
  std::vector<Vec3> vertices;
  std::vector<std::array<std::int64_t, 4>> elements;
  std::vector<BoundaryFacet> boundary;

  int vertices_per_element() const { return dim + 1; }

  /// Throws ConfigError / GeometryError if any invariant is violated:
  /// positive element measure, uniquely tagged boundary facets, conformity.
  void validate() const;
};

/// Plain-text mesh format: header "dim nv ne nb", vertex lines, element lines,
/// boundary-facet lines ending with a tag string.
CoarseMesh read_coarse_mesh(std::istream& in);
CoarseMesh read_coarse_mesh_file(const std::string& path);
void write_coarse_mesh(std::ostream& out, const CoarseMesh& mesh);

// Built-in generators. Facets get `tag` unless noted otherwise.
CoarseMesh make_unit_square(int nx = 1, int ny = 1, BoundaryTag tag = BoundaryTag::Dirichlet);
CoarseMesh make_rectangle(double length, double height, int nx, int ny,
                          BoundaryTag tag = BoundaryTag::Dirichlet);
CoarseMesh make_unit_cube(BoundaryTag tag = BoundaryTag::Dirichlet);
CoarseMesh make_box(double lx, double ly, double lz, int nx, int ny, int nz,
                    BoundaryTag tag = BoundaryTag::Dirichlet);

/// Annular ring of n_tangential x n_radial quads split into triangle pairs.
/// Vertices are placed on circles so the polygon boundary is inscribed in
/// radius r_min / r_max; pair with an annulus BlendingMap of the same arity.
CoarseMesh make_annulus(double r_min, double r_max, int n_tangential, int n_radial,
                        BoundaryTag tag = BoundaryTag::Dirichlet);

}  // namespace mmoc::mesh
