#pragma once

#include <cstdint>
#include <vector>

#include "mmoc/hierarchy.hpp"

namespace mmoc::fem {

/// Lagrange P1 / P2 space on the finest hierarchy level. P1 DoFs sit on grid
/// vertices, P2 DoFs on vertices plus edge midpoints; both are realized as the
/// vertex set of a lattice level (L, respectively L+1), which fixes a unique
/// owning macro-primitive per DoF.
class FunctionSpace {
 public:
  FunctionSpace(const mesh::MeshHierarchy& hierarchy, int degree);

  const mesh::MeshHierarchy& hierarchy() const { return *hierarchy_; }
  int degree() const { return degree_; }
  int dim() const { return hierarchy_->dim(); }

  std::int64_t dof_count() const { return static_cast<std::int64_t>(dofs_->vertex_count()); }
  const Vec3& dof_coord(std::int64_t i) const {
    return dofs_->vertices_phys[static_cast<std::size_t>(i)];
  }
  const Vec3& dof_coord_comp(std::int64_t i) const {
    return dofs_->vertices_comp[static_cast<std::size_t>(i)];
  }
  std::int32_t dof_owner(std::int64_t i) const {
    return dofs_->vertex_owner[static_cast<std::size_t>(i)];
  }
  std::uint8_t dof_bc(std::int64_t i) const { return dofs_->vertex_bc[static_cast<std::size_t>(i)]; }
  bool is_dirichlet(std::int64_t i) const { return dof_bc(i) & mesh::bc_flags::dirichlet; }

  /// Scalar Dirichlet mask (1 where the DoF carries a Dirichlet value).
  const std::vector<std::uint8_t>& dirichlet_mask() const { return dirichlet_mask_; }

  int dofs_per_element() const { return dofs_per_element_; }
  std::size_t element_count() const { return hierarchy_->finest().element_count(); }

  /// Global DoFs of micro-element `lat_elem` inside `macro`; `out` must hold
  /// dofs_per_element() entries. Order: corners, then edges (P2).
  void element_dofs(std::int32_t macro, std::int32_t lat_elem, std::int64_t* out) const {
    const auto& map = dofs_->macro_vertex_gid[static_cast<std::size_t>(macro)];
    const auto* locals = &element_dof_locals_[static_cast<std::size_t>(lat_elem) *
                                              static_cast<std::size_t>(dofs_per_element_)];
    for (int k = 0; k < dofs_per_element_; ++k)
      out[k] = map[static_cast<std::size_t>(locals[k])];
  }

  /// DoF ids of the level-L vertices (identity for P1); used to restrict
  /// fields to micro-vertices for output.
  const std::vector<std::int64_t>& level_vertex_dofs() const { return level_vertex_dofs_; }

  /// Shape functions and reference-barycentric gradients at a point.
  /// `values` holds dofs_per_element() entries, `grads` as many Vec3 rows with
  /// derivatives w.r.t. the free barycentric coordinates (lambda_1..lambda_d).
  void shape(const double* lambda, double* values) const;
  void shape_grad(const double* lambda, Vec3* grads) const;

 private:
  const mesh::MeshHierarchy* hierarchy_;
  int degree_;
  int dofs_per_element_;
  const mesh::LevelMesh* dofs_;
  std::vector<std::int32_t> element_dof_locals_;  // [elem * dpe + k] lattice-local
  std::vector<std::int64_t> level_vertex_dofs_;
  std::vector<std::uint8_t> dirichlet_mask_;
};

}  // namespace mmoc::fem
