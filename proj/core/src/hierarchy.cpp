#include "mmoc/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "mmoc/error.hpp"

namespace mmoc::mesh {

namespace {

// Dedup key for a micro-vertex: its nonzero integer barycentric weights over
// the coarse vertex ids spanning it, sorted by id. Two macros sharing an
// interface produce identical keys for interface vertices, and the vertex
// coordinate is computed from the key alone, so sharing is bit-exact.
struct VertexKey {
  std::array<std::int64_t, 4> gid{-1, -1, -1, -1};
  std::array<std::int32_t, 4> w{0, 0, 0, 0};
  int size = 0;

  bool operator==(const VertexKey& o) const {
    if (size != o.size) return false;
    for (int i = 0; i < size; ++i)
      if (gid[i] != o.gid[i] || w[i] != o.w[i]) return false;
    return true;
  }
};

struct VertexKeyHash {
  std::size_t operator()(const VertexKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t x) {
      h ^= x;
      h *= 1099511628211ull;
    };
    for (int i = 0; i < k.size; ++i) {
      mix(static_cast<std::uint64_t>(k.gid[i]));
      mix(static_cast<std::uint64_t>(k.w[i]));
    }
    return static_cast<std::size_t>(h);
  }
};

VertexKey make_key(const std::array<std::int64_t, 4>& corners, int n_corners,
                   const std::array<int, 3>& lattice, int n) {
  // weights: (n - i - j - k, i, j, k) w.r.t. the macro corner order
  std::array<std::int32_t, 4> weights{};
  weights[0] = static_cast<std::int32_t>(n - lattice[0] - lattice[1] - lattice[2]);
  weights[1] = lattice[0];
  weights[2] = lattice[1];
  weights[3] = lattice[2];
  VertexKey key;
  for (int c = 0; c < n_corners; ++c) {
    if (weights[c] == 0) continue;
    key.gid[key.size] = corners[static_cast<std::size_t>(c)];
    key.w[key.size] = weights[c];
    ++key.size;
  }
  // insertion sort by gid
  for (int i = 1; i < key.size; ++i)
    for (int j = i; j > 0 && key.gid[j] < key.gid[j - 1]; --j) {
      std::swap(key.gid[j], key.gid[j - 1]);
      std::swap(key.w[j], key.w[j - 1]);
    }
  return key;
}

}  // namespace

MeshHierarchy::MeshHierarchy(CoarseMesh coarse, int levels, BlendingMap blending)
    : coarse_(std::move(coarse)), levels_(levels), blending_(blending) {
  if (levels < 0) throw ConfigError("refinement level must be non-negative");
  coarse_.validate();

  build_primitives();

  volume_corners_.resize(coarse_.elements.size());
  for (std::size_t e = 0; e < coarse_.elements.size(); ++e)
    for (int c = 0; c <= dim(); ++c)
      volume_corners_[e][static_cast<std::size_t>(c)] =
          coarse_.vertices[static_cast<std::size_t>(coarse_.elements[e][static_cast<std::size_t>(c)])];

  lattices_.resize(static_cast<std::size_t>(levels_) + 2);
  for (int l = 0; l <= levels_; ++l)
    level_meshes_.push_back(build_level(l, true));

  // shortest physical edge on the finest level
  const LevelMesh& fine = finest();
  h_min_ = std::numeric_limits<double>::max();
  const int ne_edges = dim() == 2 ? 3 : 6;
  static const int edge_v[6][2] = {{0, 1}, {1, 2}, {0, 2}, {0, 3}, {1, 3}, {2, 3}};
  for (const auto& e : fine.elements)
    for (int k = 0; k < ne_edges; ++k) {
      const double d = dist(fine.vertices_phys[static_cast<std::size_t>(e[edge_v[k][0]])],
                            fine.vertices_phys[static_cast<std::size_t>(e[edge_v[k][1]])]);
      h_min_ = std::min(h_min_, d);
    }
}

const RefinedLattice& MeshHierarchy::lattice(int l) const {
  auto& slot = lattices_[static_cast<std::size_t>(l)];
  if (!slot) slot = std::make_unique<RefinedLattice>(dim(), l);
  return *slot;
}

const LevelMesh& MeshHierarchy::dof_mesh(int degree) const {
  if (degree == 1) return finest();
  if (degree != 2) throw ConfigError("only P1 and P2 DoF layouts are supported");
  if (!p2_dof_mesh_) p2_dof_mesh_ = build_level(levels_ + 1, false);
  return *p2_dof_mesh_;
}

std::unique_ptr<LevelMesh> MeshHierarchy::build_level(int l, bool with_elements) const {
  const RefinedLattice& lat = lattice(l);
  auto mesh = std::make_unique<LevelMesh>();
  const auto n_macros = coarse_.elements.size();
  mesh->macro_vertex_gid.resize(n_macros);

  std::unordered_map<VertexKey, std::int64_t, VertexKeyHash> dedup;
  dedup.reserve(n_macros * lat.vertex_count() / 2 + 16);

  // coarse vertex -> boundary facets touching it, for bc classification
  std::vector<std::vector<std::int32_t>> vertex_facets(coarse_.vertices.size());
  for (std::size_t f = 0; f < coarse_.boundary.size(); ++f)
    for (int c = 0; c < dim(); ++c)
      vertex_facets[static_cast<std::size_t>(coarse_.boundary[f].vertices[static_cast<std::size_t>(c)])]
          .push_back(static_cast<std::int32_t>(f));

  // interface primitive lookup by sorted corner tuple
  std::map<std::array<std::int64_t, 3>, std::int64_t> face_prim;
  std::map<std::array<std::int64_t, 2>, std::int64_t> edge_prim;
  std::vector<std::int64_t> vertex_prim(coarse_.vertices.size(), -1);
  for (const auto& p : primitives_) {
    if (p.kind == PrimitiveKind::Face)
      face_prim[{p.corners[0], p.corners[1], p.corners[2]}] = p.id;
    else if (p.kind == PrimitiveKind::Edge)
      edge_prim[{p.corners[0], p.corners[1]}] = p.id;
    else if (p.kind == PrimitiveKind::Vertex)
      vertex_prim[static_cast<std::size_t>(p.corners[0])] = p.id;
  }

  const double inv_n = 1.0 / lat.n();
  for (std::size_t m = 0; m < n_macros; ++m) {
    auto& local_to_global = mesh->macro_vertex_gid[m];
    local_to_global.resize(lat.vertex_count());
    const auto& corners = coarse_.elements[m];
    for (std::size_t lv = 0; lv < lat.vertex_count(); ++lv) {
      const auto key = make_key(corners, dim() + 1, lat.vertex_coords(static_cast<std::int32_t>(lv)),
                                lat.n());
      auto [it, inserted] = dedup.emplace(key, static_cast<std::int64_t>(mesh->vertices_comp.size()));
      local_to_global[lv] = it->second;
      if (!inserted) continue;

      // coordinate from the canonical key: fixed summation order
      Vec3 xc{0, 0, 0};
      for (int c = 0; c < key.size; ++c)
        xc += (key.w[static_cast<std::size_t>(c)] * inv_n) *
              coarse_.vertices[static_cast<std::size_t>(key.gid[static_cast<std::size_t>(c)])];
      mesh->vertices_comp.push_back(xc);
      mesh->vertices_phys.push_back(blending_.forward(xc));

      // owning primitive from the support
      std::int64_t owner = -1;
      if (key.size == 1)
        owner = vertex_prim[static_cast<std::size_t>(key.gid[0])];
      else if (key.size == 2)
        owner = edge_prim.at({key.gid[0], key.gid[1]});
      else if (key.size == 3 && dim() == 3)
        owner = face_prim.at({key.gid[0], key.gid[1], key.gid[2]});
      else
        owner = static_cast<std::int64_t>(m);
      mesh->vertex_owner.push_back(static_cast<std::int32_t>(owner));

      // boundary classification: the vertex lies on every boundary facet whose
      // corner set contains its support
      std::uint8_t flags = 0;
      if (key.size <= dim()) {
        for (const auto f : vertex_facets[static_cast<std::size_t>(key.gid[0])]) {
          const auto& bf = coarse_.boundary[static_cast<std::size_t>(f)];
          bool contained = true;
          for (int c = 0; c < key.size && contained; ++c) {
            bool found = false;
            for (int fc = 0; fc < dim(); ++fc)
              found |= bf.vertices[static_cast<std::size_t>(fc)] == key.gid[static_cast<std::size_t>(c)];
            contained = found;
          }
          if (!contained) continue;
          flags |= bc_flags::boundary;
          switch (bf.tag) {
            case BoundaryTag::Dirichlet: flags |= bc_flags::dirichlet; break;
            case BoundaryTag::Neumann: flags |= bc_flags::neumann; break;
            case BoundaryTag::NoSlip: flags |= bc_flags::noslip; break;
            case BoundaryTag::FreeSlip: {
              // constrained component = facet normal axis (axis-aligned only)
              Vec3 nrm;
              const Vec3 a = coarse_.vertices[static_cast<std::size_t>(bf.vertices[0])];
              const Vec3 b = coarse_.vertices[static_cast<std::size_t>(bf.vertices[1])];
              if (dim() == 2) {
                const Vec3 t = b - a;
                nrm = {t.y, -t.x, 0.0};
              } else {
                const Vec3 c2 = coarse_.vertices[static_cast<std::size_t>(bf.vertices[2])];
                nrm = cross(b - a, c2 - a);
              }
              const double nn = norm(nrm);
              int axis = -1;
              for (int ax = 0; ax < 3; ++ax)
                if (std::abs(std::abs(nrm[ax]) - nn) < 1e-12 * nn) axis = ax;
              if (axis < 0)
                throw ConfigError("free-slip requires axis-aligned boundary facets");
              flags |= static_cast<std::uint8_t>(bc_flags::freeslip_x << axis);
              break;
            }
            case BoundaryTag::Interior: break;
          }
        }
      }
      mesh->vertex_bc.push_back(flags);
    }

    if (with_elements) {
      for (std::size_t e = 0; e < lat.element_count(); ++e) {
        const auto& le = lat.element(static_cast<std::int32_t>(e));
        std::array<std::int64_t, 4> ge{-1, -1, -1, -1};
        for (int c = 0; c <= dim(); ++c)
          ge[static_cast<std::size_t>(c)] = local_to_global[static_cast<std::size_t>(le[static_cast<std::size_t>(c)])];
        mesh->elements.push_back(ge);
        mesh->element_macro.push_back(static_cast<std::int32_t>(m));
      }
    }
  }
  return mesh;
}

void MeshHierarchy::build_primitives() {
  const auto ne = static_cast<std::int64_t>(coarse_.elements.size());
  primitives_.clear();
  for (std::int64_t e = 0; e < ne; ++e) {
    MacroPrimitive p;
    p.id = e;
    p.kind = PrimitiveKind::Volume;
    p.corner_count = dim() + 1;
    p.corners = coarse_.elements[static_cast<std::size_t>(e)];
    primitives_.push_back(std::move(p));
  }

  std::map<std::array<std::int64_t, 3>, std::vector<std::int64_t>> faces;
  std::map<std::array<std::int64_t, 2>, std::vector<std::int64_t>> edges;
  std::vector<std::vector<std::int64_t>> verts(coarse_.vertices.size());

  auto sorted2 = [](std::int64_t a, std::int64_t b) {
    return std::array<std::int64_t, 2>{std::min(a, b), std::max(a, b)};
  };
  for (std::int64_t e = 0; e < ne; ++e) {
    const auto& el = coarse_.elements[static_cast<std::size_t>(e)];
    if (dim() == 3) {
      static const int face_v[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
      for (const auto& fv : face_v) {
        std::array<std::int64_t, 3> f{el[fv[0]], el[fv[1]], el[fv[2]]};
        std::sort(f.begin(), f.end());
        faces[f].push_back(e);
      }
    }
    const int n_edges = dim() == 2 ? 3 : 6;
    static const int edge_v[6][2] = {{0, 1}, {1, 2}, {0, 2}, {0, 3}, {1, 3}, {2, 3}};
    for (int k = 0; k < n_edges; ++k) edges[sorted2(el[edge_v[k][0]], el[edge_v[k][1]])].push_back(e);
    for (int c = 0; c <= dim(); ++c) verts[static_cast<std::size_t>(el[c])].push_back(e);
  }

  auto add_interface = [&](PrimitiveKind kind, const std::int64_t* corners, int n_corners,
                           std::vector<std::int64_t> vols) {
    MacroPrimitive p;
    p.id = static_cast<std::int64_t>(primitives_.size());
    p.kind = kind;
    p.corner_count = n_corners;
    for (int c = 0; c < n_corners; ++c) p.corners[static_cast<std::size_t>(c)] = corners[c];
    std::sort(vols.begin(), vols.end());
    vols.erase(std::unique(vols.begin(), vols.end()), vols.end());
    p.neighbors = vols;
    for (const auto v : vols) primitives_[static_cast<std::size_t>(v)].neighbors.push_back(p.id);
    primitives_.push_back(std::move(p));
  };

  for (const auto& [key, vols] : faces) add_interface(PrimitiveKind::Face, key.data(), 3, vols);
  for (const auto& [key, vols] : edges) add_interface(PrimitiveKind::Edge, key.data(), 2, vols);
  for (std::size_t v = 0; v < verts.size(); ++v) {
    const std::int64_t c = static_cast<std::int64_t>(v);
    add_interface(PrimitiveKind::Vertex, &c, 1, verts[v]);
  }

  // walk neighborhood: volumes sharing at least one coarse vertex
  volume_walk_.assign(static_cast<std::size_t>(ne), {});
  for (std::int64_t e = 0; e < ne; ++e) {
    std::vector<std::int64_t> near;
    for (int c = 0; c <= dim(); ++c) {
      const auto& shared = verts[static_cast<std::size_t>(coarse_.elements[static_cast<std::size_t>(e)][c])];
      near.insert(near.end(), shared.begin(), shared.end());
    }
    std::sort(near.begin(), near.end());
    near.erase(std::unique(near.begin(), near.end()), near.end());
    for (const auto v : near)
      if (v != e) volume_walk_[static_cast<std::size_t>(e)].push_back(static_cast<std::int32_t>(v));
  }
}

std::int32_t MeshHierarchy::anchor_volume(std::int64_t prim) const {
  const auto& p = primitives_[static_cast<std::size_t>(prim)];
  if (p.kind == PrimitiveKind::Volume) return static_cast<std::int32_t>(p.id);
  // neighbors of interface primitives are volumes, sorted ascending
  return static_cast<std::int32_t>(p.neighbors.front());
}

MeshHierarchy::MacroHit MeshHierarchy::find_macro(const Vec3& x_comp, std::int32_t hint_volume,
                                                  bool allow_global) const {
  constexpr double tol = 1e-10;
  MacroHit hit;
  auto try_macro = [&](std::int32_t m) {
    const auto lam = barycentric(volume_corners_[static_cast<std::size_t>(m)].data(), dim(), x_comp);
    double lo = lam[0];
    for (int c = 1; c <= dim(); ++c) lo = std::min(lo, lam[static_cast<std::size_t>(c)]);
    if (lo >= -tol) {
      hit.macro = m;
      hit.lambda = lam;
      return true;
    }
    return false;
  };

  if (hint_volume >= 0 && hint_volume < volume_count()) {
    if (try_macro(hint_volume)) return hit;
    for (const auto m : volume_walk_[static_cast<std::size_t>(hint_volume)])
      if (try_macro(m)) return hit;
  }
  if (!allow_global) return hit;
  hit.escalated = true;
  for (std::int32_t m = 0; m < volume_count(); ++m)
    if (try_macro(m)) return hit;
  hit.macro = -1;
  return hit;
}

Vec3 MeshHierarchy::project_to_domain(const Vec3& x_comp) const {
  double best = std::numeric_limits<double>::max();
  Vec3 proj = x_comp;
  for (const auto& bf : coarse_.boundary) {
    const Vec3 a = coarse_.vertices[static_cast<std::size_t>(bf.vertices[0])];
    const Vec3 b = coarse_.vertices[static_cast<std::size_t>(bf.vertices[1])];
    Vec3 cand;
    if (dim() == 2) {
      cand = closest_point_segment(a, b, x_comp);
    } else {
      const Vec3 c = coarse_.vertices[static_cast<std::size_t>(bf.vertices[2])];
      cand = closest_point_triangle(a, b, c, x_comp);
    }
    const double d = dist(cand, x_comp);
    if (d < best) {
      best = d;
      proj = cand;
    }
  }
  return proj;
}

Vec3 MeshHierarchy::blend(const Vec3& x, BlendDirection direction) const {
  constexpr double tol = 1e-10;
  const Vec3 xc = direction == BlendDirection::Forward ? x : blending_.inverse(x);
  const auto hit = find_macro(xc, 0, true);
  bool inside = false;
  if (hit.macro >= 0) {
    double lo = hit.lambda[0];
    for (int c = 1; c <= dim(); ++c) lo = std::min(lo, hit.lambda[static_cast<std::size_t>(c)]);
    inside = lo >= -1e-14;
  }
  if (inside) return direction == BlendDirection::Forward ? blending_.forward(xc) : xc;
  const Vec3 proj = project_to_domain(xc);
  if (dist(proj, xc) > tol)
    throw OutOfDomainError("point outside the computational domain", x);
  return direction == BlendDirection::Forward ? blending_.forward(proj) : proj;
}

MeshHierarchy refine(CoarseMesh coarse, int levels, BlendingMap blending) {
  return MeshHierarchy(std::move(coarse), levels, blending);
}

double min_edge_length(const MeshHierarchy& h) { return h.min_edge_length(); }

}  // namespace mmoc::mesh
