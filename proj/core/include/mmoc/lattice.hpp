#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace mmoc::mesh {

/// Structured refinement of the reference simplex, shared by every macro
/// element of a hierarchy level.
///
/// Micro-vertices live on the integer barycentric lattice: a vertex with free
/// coordinates (i, j, k), i + j + k <= n = 2^level, has barycentric weights
/// (n-i-j-k, i, j, k) w.r.t. the macro corners. Triangles refine by midpoint
/// subdivision, tetrahedra by the red refinement rule of Bey (inner octahedron
/// split along the x02-x13 diagonal), applied recursively so the congruence
/// classes stay bounded.
///
/// Every micro-element fits inside one unit lattice cell; a CSR table maps
/// cells to their elements, which makes point location inside a macro O(1).
class RefinedLattice {
 public:
  RefinedLattice(int dim, int level);

  int dim() const { return dim_; }
  int level() const { return level_; }
  int n() const { return n_; }

  std::size_t vertex_count() const { return verts_.size(); }
  std::size_t element_count() const { return elems_.size(); }

  const std::array<int, 3>& vertex_coords(std::int32_t local) const {
    return verts_[static_cast<std::size_t>(local)];
  }
  const std::array<std::int32_t, 4>& element(std::int32_t e) const {
    return elems_[static_cast<std::size_t>(e)];
  }

  /// Local vertex index for integer lattice coordinates, -1 if absent.
  std::int32_t local_index(int i, int j, int k) const;

  /// Elements whose bounding lattice cell is (ci, cj, ck).
  struct CellRange {
    const std::int32_t* begin;
    const std::int32_t* end;
  };
  CellRange cell_elements(int ci, int cj, int ck) const;

 private:
  int dim_;
  int level_;
  int n_;
  std::vector<std::array<int, 3>> verts_;
  std::vector<std::array<std::int32_t, 4>> elems_;
  std::vector<std::int32_t> cell_offsets_;
  std::vector<std::int32_t> cell_elems_;
  std::unordered_map<std::int64_t, std::int32_t> coord_to_local_;

  std::size_t cell_linear(int ci, int cj, int ck) const {
    return (static_cast<std::size_t>(ck) * n_ + cj) * n_ + ci;
  }
};

}  // namespace mmoc::mesh
