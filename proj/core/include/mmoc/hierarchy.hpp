#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "mmoc/blending.hpp"
#include "mmoc/coarse_mesh.hpp"
#include "mmoc/geometry.hpp"
#include "mmoc/lattice.hpp"

namespace mmoc::mesh {

enum class PrimitiveKind : std::uint8_t { Volume, Face, Edge, Vertex };

/// Macro-primitive of the block-structured grid: one Volume per coarse
/// element plus interface primitives (faces in 3D, edges, vertices). Interface
/// primitives list their adjacent volumes as neighbors; volumes list their
/// interfaces. Ids are dense: volumes first, then faces, edges, vertices, each
/// class in deterministic key order.
struct MacroPrimitive {
  std::int64_t id = -1;
  PrimitiveKind kind = PrimitiveKind::Volume;
  std::array<std::int64_t, 4> corners{-1, -1, -1, -1};  // coarse vertex ids
  int corner_count = 0;
  std::vector<std::int64_t> neighbors;
};

// Per-vertex boundary classification bits.
namespace bc_flags {
constexpr std::uint8_t dirichlet = 1 << 0;
constexpr std::uint8_t neumann = 1 << 1;
constexpr std::uint8_t noslip = 1 << 2;
constexpr std::uint8_t freeslip_x = 1 << 3;
constexpr std::uint8_t freeslip_y = 1 << 4;
constexpr std::uint8_t freeslip_z = 1 << 5;
constexpr std::uint8_t boundary = 1 << 6;
}  // namespace bc_flags

/// One refinement level: globally deduplicated vertices plus the per-macro
/// map from lattice-local vertex indices to global ids. Interface vertices
/// are stored exactly once, so adjacent macros share them bit-identically.
struct LevelMesh {
  std::vector<Vec3> vertices_comp;
  std::vector<Vec3> vertices_phys;
  std::vector<std::int32_t> vertex_owner;  // owning primitive id
  std::vector<std::uint8_t> vertex_bc;     // bc_flags bits
  std::vector<std::array<std::int64_t, 4>> elements;  // global vertex ids
  std::vector<std::int32_t> element_macro;
  std::vector<std::vector<std::int64_t>> macro_vertex_gid;  // [macro][lattice local]

  std::size_t vertex_count() const { return vertices_comp.size(); }
  std::size_t element_count() const { return elements.size(); }
};

/// Block-structured hierarchy: the coarse mesh refined `level` times inside
/// every macro element, with a blending map onto the physical domain.
/// Immutable after construction.
class MeshHierarchy {
 public:
  MeshHierarchy(CoarseMesh coarse, int levels, BlendingMap blending = BlendingMap::identity());

  int dim() const { return coarse_.dim; }
  int max_level() const { return levels_; }
  const CoarseMesh& coarse() const { return coarse_; }
  const BlendingMap& blending() const { return blending_; }

  const LevelMesh& level(int l) const { return *level_meshes_[static_cast<std::size_t>(l)]; }
  const LevelMesh& finest() const { return level(levels_); }
  const RefinedLattice& lattice(int l) const;

  /// Mesh carrying the DoF layout of a P`degree` space: level L for degree 1,
  /// the once-more-refined lattice for degree 2 (vertices + edge midpoints).
  const LevelMesh& dof_mesh(int degree) const;

  /// Shortest physical edge of the finest level.
  double min_edge_length() const { return h_min_; }

  const std::vector<MacroPrimitive>& primitives() const { return primitives_; }
  const MacroPrimitive& primitive(std::int64_t id) const {
    return primitives_[static_cast<std::size_t>(id)];
  }
  std::int64_t volume_count() const { return static_cast<std::int64_t>(coarse_.elements.size()); }

  /// Volume primitive used to start searches for entities on `prim`
  /// (lowest-id adjacent volume for interface primitives).
  std::int32_t anchor_volume(std::int64_t prim) const;

  /// Volumes sharing at least one coarse vertex with `vol` (walk neighborhood).
  const std::vector<std::int32_t>& volume_walk_neighbors(std::int32_t vol) const {
    return volume_walk_[static_cast<std::size_t>(vol)];
  }

  /// Computational corner coordinates of a volume's coarse simplex.
  const std::array<Vec3, 4>& volume_corners(std::int32_t vol) const {
    return volume_corners_[static_cast<std::size_t>(vol)];
  }

  struct MacroHit {
    std::int32_t macro = -1;
    std::array<double, 4> lambda{};
    bool escalated = false;  // fell back to a global scan
  };
  /// Find the macro containing a computational point: hinted volume first,
  /// then its walk neighborhood, then (optionally) all volumes.
  MacroHit find_macro(const Vec3& x_comp, std::int32_t hint_volume, bool allow_global = true) const;

  /// Nearest point of the computational domain boundary.
  Vec3 project_to_domain(const Vec3& x_comp) const;

  enum class BlendDirection { Forward, Inverse };
  /// Checked blending: points up to 1e-10 outside the hull are clamped,
  /// anything farther raises OutOfDomainError.
  Vec3 blend(const Vec3& x, BlendDirection direction) const;

 private:
  CoarseMesh coarse_;
  int levels_;
  BlendingMap blending_;
  double h_min_ = 0.0;

  std::vector<std::unique_ptr<LevelMesh>> level_meshes_;
  mutable std::vector<std::unique_ptr<RefinedLattice>> lattices_;  // index = level
  mutable std::unique_ptr<LevelMesh> p2_dof_mesh_;

  std::vector<MacroPrimitive> primitives_;
  std::vector<std::vector<std::int32_t>> volume_walk_;
  std::vector<std::array<Vec3, 4>> volume_corners_;

  std::unique_ptr<LevelMesh> build_level(int l, bool with_elements) const;
  void build_primitives();
};

/// Uniform refinement entry point.
MeshHierarchy refine(CoarseMesh coarse, int levels, BlendingMap blending = BlendingMap::identity());

double min_edge_length(const MeshHierarchy& h);

}  // namespace mmoc::mesh
