#include "mmoc/locate.hpp"

#include <algorithm>
#include <cmath>

#include "mmoc/error.hpp"

namespace mmoc::fem {

FieldEvaluator::FieldEvaluator(const mesh::MeshHierarchy& h)
    : h_(&h),
      lat_(&h.lattice(h.max_level())),
      dim_(h.dim()),
      n_(lat_->n()),
      blended_(h.blending().kind() != mesh::BlendingMap::Kind::Identity) {}

bool FieldEvaluator::micro_locate(const std::array<double, 4>& lambda, ElementLocation& loc,
                                  EvalStats* stats) const {
  // free barycentric coordinates scaled to lattice units
  double u[3] = {lambda[1] * n_, lambda[2] * n_, dim_ == 3 ? lambda[3] * n_ : 0.0};
  int cell[3] = {0, 0, 0};
  for (int c = 0; c < dim_; ++c)
    cell[c] = std::clamp(static_cast<int>(u[c]), 0, n_ - 1);
  // keep the cell inside the simplex wedge
  int guard = 3;
  while (cell[0] + cell[1] + cell[2] > n_ - 1 && guard-- > 0) {
    int big = 0;
    for (int c = 1; c < dim_; ++c)
      if (cell[c] > cell[big]) big = c;
    --cell[big];
  }

  const Vec3 up{u[0], u[1], u[2]};
  double best_min = -1e30;
  std::int32_t best_elem = -1;
  std::array<double, 4> best_mu{};

  auto scan_cell = [&](int ci, int cj, int ck) {
    const auto range = lat_->cell_elements(ci, cj, ck);
    for (const auto* it = range.begin; it != range.end; ++it) {
      const auto& le = lat_->element(*it);
      Vec3 corner[4];
      for (int c = 0; c <= dim_; ++c) {
        const auto& ic = lat_->vertex_coords(le[static_cast<std::size_t>(c)]);
        corner[c] = {static_cast<double>(ic[0]), static_cast<double>(ic[1]),
                     static_cast<double>(ic[2])};
      }
      const auto mu = barycentric(corner, dim_, up);
      double lo = mu[0];
      for (int c = 1; c <= dim_; ++c) lo = std::min(lo, mu[static_cast<std::size_t>(c)]);
      if (lo > best_min) {
        best_min = lo;
        best_elem = *it;
        best_mu = mu;
      }
    }
  };

  scan_cell(cell[0], cell[1], cell[2]);
  constexpr double tol = -1e-9;
  if (best_min < tol) {
    // the point sits on a cell boundary: widen to the adjacent cells
    if (stats) ++stats->cell_fallbacks;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj)
        for (int dk = (dim_ == 3 ? -1 : 0); dk <= (dim_ == 3 ? 1 : 0); ++dk) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          scan_cell(cell[0] + di, cell[1] + dj, cell[2] + dk);
        }
  }
  if (best_elem < 0) return false;

  // clamp round-off and renormalize
  double sum = 0.0;
  for (int c = 0; c <= dim_; ++c) {
    best_mu[static_cast<std::size_t>(c)] = std::max(best_mu[static_cast<std::size_t>(c)], 0.0);
    sum += best_mu[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c <= dim_; ++c) best_mu[static_cast<std::size_t>(c)] /= sum;
  loc.lat_elem = best_elem;
  loc.mu = best_mu;
  return true;
}

ElementLocation FieldEvaluator::locate_comp(const Vec3& x_comp, std::int32_t hint_volume,
                                            EvalStats* stats) const {
  ElementLocation loc;
  const auto hit = h_->find_macro(x_comp, hint_volume, true);
  if (hit.escalated && stats) ++stats->global_scans;
  if (hit.macro < 0) return loc;
  loc.macro = hit.macro;
  micro_locate(hit.lambda, loc, stats);
  return loc;
}

ElementLocation FieldEvaluator::locate(Vec3& point, std::int32_t hint_volume, OutsidePolicy policy,
                                       EvalStats* stats) const {
  const Vec3 xc = blended_ ? h_->blending().inverse(point) : point;
  ElementLocation loc = locate_comp(xc, hint_volume, stats);
  if (loc.valid()) return loc;

  if (policy == OutsidePolicy::Error)
    throw OutOfDomainError("point not locatable in the domain", point);

  // clamp: project onto the computational boundary, then locate the projection
  if (stats) ++stats->clamps;
  const Vec3 proj = h_->project_to_domain(xc);
  loc = locate_comp(proj, hint_volume, stats);
  if (!loc.valid()) {
    // boundary round-off: take the best macro over a global scan
    if (stats) ++stats->global_scans;
    double best = -1e30;
    std::array<double, 4> best_lam{};
    std::int32_t best_macro = -1;
    for (std::int32_t m = 0; m < h_->volume_count(); ++m) {
      const auto lam = barycentric(h_->volume_corners(m).data(), dim_, proj);
      double lo = lam[0];
      for (int c = 1; c <= dim_; ++c) lo = std::min(lo, lam[static_cast<std::size_t>(c)]);
      if (lo > best) {
        best = lo;
        best_macro = m;
        best_lam = lam;
      }
    }
    std::array<double, 4> lam = best_lam;
    double sum = 0.0;
    for (int c = 0; c <= dim_; ++c) {
      lam[static_cast<std::size_t>(c)] = std::max(lam[static_cast<std::size_t>(c)], 0.0);
      sum += lam[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c <= dim_; ++c) lam[static_cast<std::size_t>(c)] /= sum;
    loc.macro = best_macro;
    micro_locate(lam, loc, stats);
  }
  point = blended_ ? h_->blending().forward(proj) : proj;
  return loc;
}

double FieldEvaluator::evaluate(const ScalarField& f, const ElementLocation& loc) const {
  const auto& space = *f.space;
  std::int64_t dofs[10];
  double v[10];
  space.element_dofs(loc.macro, loc.lat_elem, dofs);
  space.shape(loc.mu.data(), v);
  double acc = 0.0;
  for (int i = 0; i < space.dofs_per_element(); ++i) acc += v[i] * f[dofs[i]];
  return acc;
}

Vec3 FieldEvaluator::evaluate(const VectorField& f, const ElementLocation& loc) const {
  const auto& space = *f.space;
  std::int64_t dofs[10];
  double v[10];
  space.element_dofs(loc.macro, loc.lat_elem, dofs);
  space.shape(loc.mu.data(), v);
  Vec3 out{0, 0, 0};
  for (int i = 0; i < space.dofs_per_element(); ++i) {
    const double w = v[i];
    out.x += w * f.component[0][dofs[i]];
    out.y += w * f.component[1][dofs[i]];
    if (space.dim() == 3) out.z += w * f.component[2][dofs[i]];
  }
  return out;
}

double FieldEvaluator::evaluate(const ScalarField& f, const Vec3& z, std::int64_t hint_primitive,
                                OutsidePolicy policy, EvalStats* stats) const {
  Vec3 p = z;
  const auto loc = locate(p, h_->anchor_volume(hint_primitive), policy, stats);
  if (!loc.valid()) throw OutOfDomainError("point not locatable", z);
  return evaluate(f, loc);
}

Vec3 FieldEvaluator::evaluate(const VectorField& f, const Vec3& z, std::int64_t hint_primitive,
                              OutsidePolicy policy, EvalStats* stats) const {
  Vec3 p = z;
  const auto loc = locate(p, h_->anchor_volume(hint_primitive), policy, stats);
  if (!loc.valid()) throw OutOfDomainError("point not locatable", z);
  return evaluate(f, loc);
}

}  // namespace mmoc::fem
