#include "mmoc/space.hpp"

#include "mmoc/error.hpp"

namespace mmoc::fem {

namespace {
// element edge order: P2 midpoint DoFs follow the corner DoFs in this order
constexpr int edge_v[6][2] = {{0, 1}, {1, 2}, {0, 2}, {0, 3}, {1, 3}, {2, 3}};
}

FunctionSpace::FunctionSpace(const mesh::MeshHierarchy& hierarchy, int degree)
    : hierarchy_(&hierarchy), degree_(degree) {
  if (degree != 1 && degree != 2) throw ConfigError("FunctionSpace: degree must be 1 or 2");
  const int d = hierarchy.dim();
  const int corners = d + 1;
  const int edges = d == 2 ? 3 : 6;
  dofs_per_element_ = degree == 1 ? corners : corners + edges;
  dofs_ = &hierarchy.dof_mesh(degree);

  const auto& lat = hierarchy.lattice(hierarchy.max_level());
  element_dof_locals_.resize(lat.element_count() * static_cast<std::size_t>(dofs_per_element_));

  if (degree == 1) {
    for (std::size_t e = 0; e < lat.element_count(); ++e) {
      const auto& le = lat.element(static_cast<std::int32_t>(e));
      for (int c = 0; c < corners; ++c)
        element_dof_locals_[e * static_cast<std::size_t>(dofs_per_element_) +
                            static_cast<std::size_t>(c)] = le[static_cast<std::size_t>(c)];
    }
    level_vertex_dofs_.resize(dofs_->vertex_count());
    for (std::size_t v = 0; v < level_vertex_dofs_.size(); ++v)
      level_vertex_dofs_[v] = static_cast<std::int64_t>(v);
  } else {
    // DoF lattice is one level finer: corner coords double, midpoints are sums
    const auto& dof_lat = hierarchy.lattice(hierarchy.max_level() + 1);
    for (std::size_t e = 0; e < lat.element_count(); ++e) {
      const auto& le = lat.element(static_cast<std::int32_t>(e));
      std::array<std::array<int, 3>, 4> cc{};
      for (int c = 0; c < corners; ++c)
        cc[static_cast<std::size_t>(c)] = lat.vertex_coords(le[static_cast<std::size_t>(c)]);
      auto* out = &element_dof_locals_[e * static_cast<std::size_t>(dofs_per_element_)];
      for (int c = 0; c < corners; ++c) {
        const auto& a = cc[static_cast<std::size_t>(c)];
        out[c] = dof_lat.local_index(2 * a[0], 2 * a[1], 2 * a[2]);
      }
      for (int k = 0; k < edges; ++k) {
        const auto& a = cc[static_cast<std::size_t>(edge_v[k][0])];
        const auto& b = cc[static_cast<std::size_t>(edge_v[k][1])];
        out[corners + k] = dof_lat.local_index(a[0] + b[0], a[1] + b[1], a[2] + b[2]);
      }
    }
    // level-L vertex -> P2 DoF, macro by macro (shared vertices coincide)
    const auto& level = hierarchy.finest();
    level_vertex_dofs_.assign(level.vertex_count(), -1);
    for (std::size_t m = 0; m < level.macro_vertex_gid.size(); ++m) {
      const auto& lmap = level.macro_vertex_gid[m];
      const auto& dmap = dofs_->macro_vertex_gid[m];
      for (std::size_t lv = 0; lv < lmap.size(); ++lv) {
        const auto& c = lat.vertex_coords(static_cast<std::int32_t>(lv));
        const auto dl = dof_lat.local_index(2 * c[0], 2 * c[1], 2 * c[2]);
        level_vertex_dofs_[static_cast<std::size_t>(lmap[lv])] = dmap[static_cast<std::size_t>(dl)];
      }
    }
  }

  dirichlet_mask_.resize(dofs_->vertex_count());
  for (std::size_t i = 0; i < dirichlet_mask_.size(); ++i)
    dirichlet_mask_[i] = (dofs_->vertex_bc[i] & mesh::bc_flags::dirichlet) ? 1 : 0;
}

void FunctionSpace::shape(const double* lambda, double* values) const {
  const int corners = dim() + 1;
  if (degree_ == 1) {
    for (int c = 0; c < corners; ++c) values[c] = lambda[c];
    return;
  }
  for (int c = 0; c < corners; ++c) values[c] = lambda[c] * (2.0 * lambda[c] - 1.0);
  const int edges = dim() == 2 ? 3 : 6;
  for (int k = 0; k < edges; ++k)
    values[corners + k] = 4.0 * lambda[edge_v[k][0]] * lambda[edge_v[k][1]];
}

void FunctionSpace::shape_grad(const double* lambda, Vec3* grads) const {
  // gradients w.r.t. the free coordinates (lambda_1, .., lambda_d);
  // lambda_0 = 1 - sum contributes -1 per free coordinate.
  const int d = dim();
  const int corners = d + 1;
  auto dlam = [&](int c, int k) { return c == 0 ? -1.0 : (c == k + 1 ? 1.0 : 0.0); };
  if (degree_ == 1) {
    for (int c = 0; c < corners; ++c)
      grads[c] = {dlam(c, 0), dlam(c, 1), d == 3 ? dlam(c, 2) : 0.0};
    return;
  }
  for (int c = 0; c < corners; ++c) {
    const double f = 4.0 * lambda[c] - 1.0;
    grads[c] = {f * dlam(c, 0), f * dlam(c, 1), d == 3 ? f * dlam(c, 2) : 0.0};
  }
  const int edges = d == 2 ? 3 : 6;
  for (int k = 0; k < edges; ++k) {
    const int a = edge_v[k][0], b = edge_v[k][1];
    Vec3 g;
    for (int fc = 0; fc < d; ++fc)
      g[fc] = 4.0 * (dlam(a, fc) * lambda[b] + lambda[a] * dlam(b, fc));
    grads[corners + k] = g;
  }
}

}  // namespace mmoc::fem
