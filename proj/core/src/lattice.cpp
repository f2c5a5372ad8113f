#include "mmoc/lattice.hpp"

#include <algorithm>

#include "mmoc/error.hpp"

namespace mmoc::mesh {

namespace {

std::int64_t pack(int i, int j, int k) {
  return (static_cast<std::int64_t>(i) << 42) | (static_cast<std::int64_t>(j) << 21) |
         static_cast<std::int64_t>(k);
}

}  // namespace

RefinedLattice::RefinedLattice(int dim, int level) : dim_(dim), level_(level), n_(1 << level) {
  if (dim != 2 && dim != 3) throw ConfigError("lattice dimension must be 2 or 3");
  if (level < 0 || level > 14) throw ConfigError("refinement level out of range");

  auto add_vertex = [&](int i, int j, int k) -> std::int32_t {
    const auto key = pack(i, j, k);
    auto it = coord_to_local_.find(key);
    if (it != coord_to_local_.end()) return it->second;
    const auto id = static_cast<std::int32_t>(verts_.size());
    verts_.push_back({i, j, k});
    coord_to_local_.emplace(key, id);
    return id;
  };

  // Level 0: the reference simplex scaled to denominator n.
  std::array<std::int32_t, 4> root{};
  root[0] = add_vertex(0, 0, 0);
  root[1] = add_vertex(n_, 0, 0);
  root[2] = add_vertex(0, n_, 0);
  if (dim_ == 3) root[3] = add_vertex(0, 0, n_);
  elems_.push_back(root);

  auto midpoint = [&](std::int32_t a, std::int32_t b) -> std::int32_t {
    const auto& va = verts_[static_cast<std::size_t>(a)];
    const auto& vb = verts_[static_cast<std::size_t>(b)];
    return add_vertex((va[0] + vb[0]) / 2, (va[1] + vb[1]) / 2, (va[2] + vb[2]) / 2);
  };

  for (int pass = 0; pass < level; ++pass) {
    std::vector<std::array<std::int32_t, 4>> next;
    next.reserve(elems_.size() * (dim_ == 2 ? 4 : 8));
    for (const auto& e : elems_) {
      if (dim_ == 2) {
        const auto m01 = midpoint(e[0], e[1]);
        const auto m12 = midpoint(e[1], e[2]);
        const auto m02 = midpoint(e[0], e[2]);
        next.push_back({e[0], m01, m02, -1});
        next.push_back({m01, e[1], m12, -1});
        next.push_back({m02, m12, e[2], -1});
        next.push_back({m01, m12, m02, -1});
      } else {
        const auto m01 = midpoint(e[0], e[1]);
        const auto m02 = midpoint(e[0], e[2]);
        const auto m03 = midpoint(e[0], e[3]);
        const auto m12 = midpoint(e[1], e[2]);
        const auto m13 = midpoint(e[1], e[3]);
        const auto m23 = midpoint(e[2], e[3]);
        next.push_back({e[0], m01, m02, m03});
        next.push_back({m01, e[1], m12, m13});
        next.push_back({m02, m12, e[2], m23});
        next.push_back({m03, m13, m23, e[3]});
        next.push_back({m01, m02, m03, m13});
        next.push_back({m01, m02, m12, m13});
        next.push_back({m02, m03, m13, m23});
        next.push_back({m02, m12, m13, m23});
      }
    }
    elems_ = std::move(next);
  }

  // The rule is applied recursively on the canonical child orderings (they
  // determine the octahedron diagonals), but two of the eight children come
  // out negatively oriented; normalize the stored tuples afterwards.
  if (dim_ == 3) {
    for (auto& e : elems_) {
      const auto& a = verts_[static_cast<std::size_t>(e[0])];
      const auto& b = verts_[static_cast<std::size_t>(e[1])];
      const auto& c = verts_[static_cast<std::size_t>(e[2])];
      const auto& d = verts_[static_cast<std::size_t>(e[3])];
      std::int64_t e1[3], e2[3], e3[3];
      for (int k = 0; k < 3; ++k) {
        e1[k] = b[k] - a[k];
        e2[k] = c[k] - a[k];
        e3[k] = d[k] - a[k];
      }
      const std::int64_t det = e1[0] * (e2[1] * e3[2] - e2[2] * e3[1]) -
                               e1[1] * (e2[0] * e3[2] - e2[2] * e3[0]) +
                               e1[2] * (e2[0] * e3[1] - e2[1] * e3[0]);
      if (det < 0) std::swap(e[2], e[3]);
    }
  }

  // CSR cell table; each element's bounding cell is the min of its corners.
  const std::size_t n_cells = static_cast<std::size_t>(n_) * n_ * (dim_ == 3 ? n_ : 1);
  std::vector<std::int32_t> cell_of(elems_.size());
  std::vector<std::int32_t> counts(n_cells, 0);
  for (std::size_t e = 0; e < elems_.size(); ++e) {
    int ci = n_, cj = n_, ck = dim_ == 3 ? n_ : 0;
    for (int v = 0; v <= dim_; ++v) {
      const auto& c = verts_[static_cast<std::size_t>(elems_[e][v])];
      ci = std::min(ci, c[0]);
      cj = std::min(cj, c[1]);
      if (dim_ == 3) ck = std::min(ck, c[2]);
    }
    const auto lin = cell_linear(ci, cj, dim_ == 3 ? ck : 0);
    cell_of[e] = static_cast<std::int32_t>(lin);
    ++counts[lin];
  }
  cell_offsets_.assign(n_cells + 1, 0);
  for (std::size_t c = 0; c < n_cells; ++c) cell_offsets_[c + 1] = cell_offsets_[c] + counts[c];
  cell_elems_.resize(elems_.size());
  std::vector<std::int32_t> cursor(cell_offsets_.begin(), cell_offsets_.end() - 1);
  for (std::size_t e = 0; e < elems_.size(); ++e)
    cell_elems_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(cell_of[e])]++)] =
        static_cast<std::int32_t>(e);
}

std::int32_t RefinedLattice::local_index(int i, int j, int k) const {
  auto it = coord_to_local_.find(pack(i, j, k));
  return it == coord_to_local_.end() ? -1 : it->second;
}

RefinedLattice::CellRange RefinedLattice::cell_elements(int ci, int cj, int ck) const {
  if (ci < 0 || cj < 0 || ck < 0 || ci >= n_ || cj >= n_ || (dim_ == 3 ? ck >= n_ : ck != 0))
    return {nullptr, nullptr};
  const auto lin = cell_linear(ci, cj, ck);
  return {cell_elems_.data() + cell_offsets_[lin], cell_elems_.data() + cell_offsets_[lin + 1]};
}

}  // namespace mmoc::mesh
