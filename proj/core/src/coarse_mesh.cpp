#include "mmoc/coarse_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mmoc/error.hpp"

namespace mmoc::mesh {

std::string to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Dirichlet: return "Dirichlet";
    case BoundaryTag::Neumann: return "Neumann";
    case BoundaryTag::FreeSlip: return "FreeSlip";
    case BoundaryTag::NoSlip: return "NoSlip";
    case BoundaryTag::Interior: return "Interior";
  }
  return "Interior";
}

BoundaryTag boundary_tag_from_string(const std::string& s) {
  if (s == "Dirichlet") return BoundaryTag::Dirichlet;
  if (s == "Neumann") return BoundaryTag::Neumann;
  if (s == "FreeSlip") return BoundaryTag::FreeSlip;
  if (s == "NoSlip") return BoundaryTag::NoSlip;
  if (s == "Interior") return BoundaryTag::Interior;
  throw ConfigError("unknown boundary tag '" + s + "'");
}

namespace {

using FacetKey = std::array<std::int64_t, 3>;

FacetKey facet_key(std::array<std::int64_t, 3> f) {
  std::sort(f.begin(), f.end());
  return f;
}

// All facets of an element: edges in 2D, triangular faces in 3D.
std::vector<FacetKey> element_facets(const std::array<std::int64_t, 4>& e, int dim) {
  if (dim == 2) {
    return {facet_key({e[0], e[1], -1}), facet_key({e[1], e[2], -1}), facet_key({e[2], e[0], -1})};
  }
  return {facet_key({e[0], e[1], e[2]}), facet_key({e[0], e[1], e[3]}),
          facet_key({e[0], e[2], e[3]}), facet_key({e[1], e[2], e[3]})};
}

}  // namespace

void CoarseMesh::validate() const {
  if (dim != 2 && dim != 3) throw ConfigError("mesh dimension must be 2 or 3");
  const auto nv = static_cast<std::int64_t>(vertices.size());
  for (std::size_t i = 0; i < elements.size(); ++i) {
    Vec3 corner[4];
    for (int k = 0; k < vertices_per_element(); ++k) {
      const auto v = elements[i][k];
      if (v < 0 || v >= nv)
        throw ConfigError("element " + std::to_string(i) + " references invalid vertex");
      corner[k] = vertices[static_cast<std::size_t>(v)];
    }
    if (simplex_measure(corner, dim) <= 0.0)
      throw GeometryError("degenerate or inverted coarse element", static_cast<long long>(i));
  }

  // Conformity: every facet is shared by at most two elements; facets on one
  // element only must carry exactly one boundary tag.
  std::map<FacetKey, int> facet_count;
  for (const auto& e : elements)
    for (const auto& f : element_facets(e, dim)) ++facet_count[f];
  for (const auto& [key, count] : facet_count)
    if (count > 2) throw ConfigError("non-conforming mesh: facet shared by >2 elements");

  std::map<FacetKey, int> tagged;
  for (const auto& bf : boundary) {
    auto key = facet_key(bf.vertices);
    auto it = facet_count.find(key);
    if (it == facet_count.end() || it->second != 1)
      throw ConfigError("boundary facet does not match a boundary of the element set");
    if (++tagged[key] > 1) throw ConfigError("boundary facet tagged more than once");
  }
  for (const auto& [key, count] : facet_count)
    if (count == 1 && tagged.find(key) == tagged.end())
      throw ConfigError("untagged boundary facet");
}

CoarseMesh read_coarse_mesh(std::istream& in) {
  CoarseMesh m;
  std::int64_t nv = 0, ne = 0, nb = 0;
  if (!(in >> m.dim >> nv >> ne >> nb)) throw ConfigError("mesh header: expected 'dim nv ne nb'");
  m.vertices.resize(static_cast<std::size_t>(nv));
  for (auto& v : m.vertices) {
    in >> v.x >> v.y;
    if (m.dim == 3) in >> v.z;
  }
  m.elements.resize(static_cast<std::size_t>(ne), {-1, -1, -1, -1});
  for (auto& e : m.elements)
    for (int k = 0; k <= m.dim; ++k) in >> e[k];
  m.boundary.resize(static_cast<std::size_t>(nb));
  for (auto& b : m.boundary) {
    for (int k = 0; k < m.dim; ++k) in >> b.vertices[k];
    std::string tag;
    in >> tag;
    b.tag = boundary_tag_from_string(tag);
  }
  if (!in) throw ConfigError("truncated mesh file");
  m.validate();
  return m;
}

CoarseMesh read_coarse_mesh_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open mesh file '" + path + "'");
  return read_coarse_mesh(f);
}

void write_coarse_mesh(std::ostream& out, const CoarseMesh& m) {
  out.precision(17);
  out << m.dim << ' ' << m.vertices.size() << ' ' << m.elements.size() << ' ' << m.boundary.size()
      << '\n';
  for (const auto& v : m.vertices) {
    out << v.x << ' ' << v.y;
    if (m.dim == 3) out << ' ' << v.z;
    out << '\n';
  }
  for (const auto& e : m.elements) {
    for (int k = 0; k <= m.dim; ++k) out << (k ? " " : "") << e[k];
    out << '\n';
  }
  for (const auto& b : m.boundary) {
    for (int k = 0; k < m.dim; ++k) out << b.vertices[k] << ' ';
    out << to_string(b.tag) << '\n';
  }
}

CoarseMesh make_rectangle(double length, double height, int nx, int ny, BoundaryTag tag) {
  if (nx < 1 || ny < 1) throw ConfigError("rectangle: nx, ny must be positive");
  CoarseMesh m;
  m.dim = 2;
  auto vid = [&](int i, int j) { return static_cast<std::int64_t>(j) * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.vertices.push_back({length * i / nx, height * j / ny, 0.0});
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      // split each quad along the same diagonal
      m.elements.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), -1});
      m.elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1), -1});
    }
  for (int i = 0; i < nx; ++i) {
    m.boundary.push_back({{vid(i, 0), vid(i + 1, 0), -1}, tag});
    m.boundary.push_back({{vid(i, ny), vid(i + 1, ny), -1}, tag});
  }
  for (int j = 0; j < ny; ++j) {
    m.boundary.push_back({{vid(0, j), vid(0, j + 1), -1}, tag});
    m.boundary.push_back({{vid(nx, j), vid(nx, j + 1), -1}, tag});
  }
  m.validate();
  return m;
}

CoarseMesh make_unit_square(int nx, int ny, BoundaryTag tag) {
  return make_rectangle(1.0, 1.0, nx, ny, tag);
}

CoarseMesh make_box(double lx, double ly, double lz, int nx, int ny, int nz, BoundaryTag tag) {
  if (nx < 1 || ny < 1 || nz < 1) throw ConfigError("box: nx, ny, nz must be positive");
  CoarseMesh m;
  m.dim = 3;
  auto vid = [&](int i, int j, int k) {
    return (static_cast<std::int64_t>(k) * (ny + 1) + j) * (nx + 1) + i;
  };
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        m.vertices.push_back({lx * i / nx, ly * j / ny, lz * k / nz});

  // Kuhn subdivision: six tets per cube, all sharing the main diagonal.
  // The pattern is reflection-free, so uniform refinement stays conforming.
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {2, 0, 1}, {1, 2, 0}, {2, 1, 0}};
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (const auto& perm : perms) {
          std::array<int, 3> at{i, j, k};
          std::array<std::int64_t, 4> tet{};
          tet[0] = vid(at[0], at[1], at[2]);
          for (int s = 0; s < 3; ++s) {
            ++at[perm[s]];
            tet[s + 1] = vid(at[0], at[1], at[2]);
          }
          // enforce positive orientation
          Vec3 c[4];
          for (int s = 0; s < 4; ++s) c[s] = m.vertices[static_cast<std::size_t>(tet[s])];
          if (simplex_measure(c, 3) < 0.0) std::swap(tet[2], tet[3]);
          m.elements.push_back(tet);
        }

  // Tag boundary faces: collect facets owned by exactly one tet.
  std::map<std::array<std::int64_t, 3>, int> count;
  auto key = [](std::array<std::int64_t, 3> f) {
    std::sort(f.begin(), f.end());
    return f;
  };
  for (const auto& e : m.elements) {
    count[key({e[0], e[1], e[2]})]++;
    count[key({e[0], e[1], e[3]})]++;
    count[key({e[0], e[2], e[3]})]++;
    count[key({e[1], e[2], e[3]})]++;
  }
  for (const auto& [f, c] : count)
    if (c == 1) m.boundary.push_back({f, tag});
  m.validate();
  return m;
}

CoarseMesh make_unit_cube(BoundaryTag tag) { return make_box(1.0, 1.0, 1.0, 1, 1, 1, tag); }

CoarseMesh make_annulus(double r_min, double r_max, int n_tangential, int n_radial,
                        BoundaryTag tag) {
  if (!(0.0 < r_min && r_min < r_max)) throw ConfigError("annulus: need 0 < r_min < r_max");
  if (n_tangential < 3 || n_radial < 1) throw ConfigError("annulus: need n_t >= 3, n_r >= 1");
  CoarseMesh m;
  m.dim = 2;
  const int nt = n_tangential, nr = n_radial;
  auto vid = [&](int i, int j) { return static_cast<std::int64_t>(j) * nt + (i % nt); };
  for (int j = 0; j <= nr; ++j) {
    const double r = r_min + (r_max - r_min) * j / nr;
    for (int i = 0; i < nt; ++i) {
      const double phi = 2.0 * M_PI * i / nt;
      m.vertices.push_back({r * std::cos(phi), r * std::sin(phi), 0.0});
    }
  }
  for (int j = 0; j < nr; ++j)
    for (int i = 0; i < nt; ++i) {
      // counter-clockwise in physical coordinates, diagonal (i,j)-(i+1,j+1)
      m.elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i + 1, j), -1});
      m.elements.push_back({vid(i, j), vid(i, j + 1), vid(i + 1, j + 1), -1});
    }
  for (int i = 0; i < nt; ++i) {
    m.boundary.push_back({{vid(i, 0), vid(i + 1, 0), -1}, tag});
    m.boundary.push_back({{vid(i, nr), vid(i + 1, nr), -1}, tag});
  }
  m.validate();
  return m;
}

}  // namespace mmoc::mesh
