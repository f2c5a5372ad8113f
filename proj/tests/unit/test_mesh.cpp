#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "mmoc/error.hpp"
#include "mmoc/hierarchy.hpp"

using namespace mmoc;
using mesh::BoundaryTag;
using mesh::CoarseMesh;

namespace {

CoarseMesh single_triangle() {
  CoarseMesh m;
  m.dim = 2;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.elements = {{0, 1, 2, -1}};
  m.boundary = {{{0, 1, -1}, BoundaryTag::Dirichlet},
                {{1, 2, -1}, BoundaryTag::Dirichlet},
                {{2, 0, -1}, BoundaryTag::Dirichlet}};
  return m;
}

CoarseMesh single_tet() {
  CoarseMesh m;
  m.dim = 3;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  m.elements = {{0, 1, 2, 3}};
  m.boundary = {{{0, 1, 2}, BoundaryTag::Dirichlet},
                {{0, 1, 3}, BoundaryTag::Dirichlet},
                {{0, 2, 3}, BoundaryTag::Dirichlet},
                {{1, 2, 3}, BoundaryTag::Dirichlet}};
  return m;
}

double level_measure(const mesh::LevelMesh& lvl, int dim) {
  double sum = 0.0;
  for (const auto& e : lvl.elements) {
    Vec3 c[4];
    for (int k = 0; k <= dim; ++k) c[k] = lvl.vertices_comp[static_cast<std::size_t>(e[k])];
    sum += simplex_measure(c, dim);
  }
  return sum;
}

}  // namespace

TEST_SUITE_BEGIN("mesh");

TEST_CASE("unit triangle refines into four congruent children") {
  const auto h = mesh::refine(single_triangle(), 1);
  CHECK(h.finest().element_count() == 4);
  CHECK(h.finest().vertex_count() == 6);
  // all children share the parent's area
  for (const auto& e : h.finest().elements) {
    Vec3 c[3];
    for (int k = 0; k < 3; ++k) c[k] = h.finest().vertices_comp[static_cast<std::size_t>(e[k])];
    CHECK(simplex_measure(c, 2) == doctest::Approx(0.125).epsilon(1e-14));
  }
}

TEST_CASE("unit tetrahedron refines into eight children with ten vertices") {
  const auto h = mesh::refine(single_tet(), 1);
  CHECK(h.finest().element_count() == 8);
  CHECK(h.finest().vertex_count() == 10);
  double vol = 0.0;
  for (const auto& e : h.finest().elements) {
    Vec3 c[4];
    for (int k = 0; k < 4; ++k) c[k] = h.finest().vertices_comp[static_cast<std::size_t>(e[k])];
    const double v = simplex_measure(c, 3);
    CHECK(v > 0.0);  // stored orientation is positive
    vol += v;
  }
  CHECK(vol == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("two-triangle unit square at level 7 owns 16641 vertices") {
  const auto h = mesh::refine(mesh::make_unit_square(), 7);
  CHECK(h.finest().vertex_count() == 16641);
  CHECK(h.finest().element_count() == 2 * (1 << 14));
}

TEST_CASE("element counts grow by 4^l / 8^l per level") {
  const auto h2 = mesh::refine(mesh::make_unit_square(2, 2), 3);
  for (int l = 0; l <= 3; ++l)
    CHECK(h2.level(l).element_count() == 8u * (1u << (2 * l)));
  const auto h3 = mesh::refine(mesh::make_unit_cube(), 2);
  for (int l = 0; l <= 2; ++l)
    CHECK(h3.level(l).element_count() == 6u * (1u << (3 * l)));
}

TEST_CASE("signed micro-element measures sum to the domain measure") {
  const auto square = mesh::refine(mesh::make_unit_square(3, 2), 3);
  for (int l = 0; l <= 3; ++l)
    CHECK(level_measure(square.level(l), 2) == doctest::Approx(1.0).epsilon(1e-12));

  const auto cube = mesh::refine(mesh::make_unit_cube(), 2);
  for (int l = 0; l <= 2; ++l)
    CHECK(level_measure(cube.level(l), 3) == doctest::Approx(1.0).epsilon(1e-12));

  // computational annulus: area of the polygonal ring
  const int nt = 12;
  const double rin = 0.5, rout = 1.5;
  const auto annulus = mesh::refine(mesh::make_annulus(rin, rout, nt, 4), 2,
                                    mesh::BlendingMap::annulus(rin, rout, nt));
  const double polygon = 0.5 * nt * std::sin(2.0 * M_PI / nt) * (rout * rout - rin * rin);
  for (int l = 0; l <= 2; ++l)
    CHECK(level_measure(annulus.level(l), 2) == doctest::Approx(polygon).epsilon(1e-12));
}

TEST_CASE("interface micro-vertices are shared, not duplicated") {
  const auto h = mesh::refine(mesh::make_unit_square(2, 2), 3);
  const auto& fine = h.finest();
  // no two distinct global vertices may carry identical coordinates
  std::set<std::pair<double, double>> seen;
  for (const auto& v : fine.vertices_comp) {
    const auto [it, inserted] = seen.emplace(v.x, v.y);
    CHECK(inserted);
  }
  // adjacent macros reference the same global ids along shared facets:
  // total references = sum of per-macro lattice sizes > global count
  std::size_t refs = 0;
  for (const auto& m : fine.macro_vertex_gid) refs += m.size();
  CHECK(refs > fine.vertex_count());
}

TEST_CASE("annulus blending is exact on the boundary and invertible inside") {
  const int nt = 12;
  const auto blend = mesh::BlendingMap::annulus(0.5, 1.5, nt);
  const auto h =
      mesh::refine(mesh::make_annulus(0.5, 1.5, nt, 4), 3, blend);

  SUBCASE("boundary vertices land on the circles") {
    const auto& fine = h.finest();
    for (std::size_t v = 0; v < fine.vertex_count(); ++v) {
      if (!(fine.vertex_bc[v] & mesh::bc_flags::boundary)) continue;
      const double r = std::hypot(fine.vertices_phys[v].x, fine.vertices_phys[v].y);
      const bool inner = std::abs(r - 0.5) < 1e-12;
      const bool outer = std::abs(r - 1.5) < 1e-12;
      CHECK((inner || outer));
    }
  }

  SUBCASE("a point on the outer polygon edge maps onto radius 1.5") {
    // midpoint of the outer polygon edge between vertex angles 0 and 2 pi/nt
    const double a0 = 0.0, a1 = 2.0 * M_PI / nt;
    const Vec3 p0{1.5 * std::cos(a0), 1.5 * std::sin(a0), 0};
    const Vec3 p1{1.5 * std::cos(a1), 1.5 * std::sin(a1), 0};
    const Vec3 mid = 0.5 * (p0 + p1);
    const Vec3 z = blend.forward(mid);
    CHECK(std::hypot(z.x, z.y) == doctest::Approx(1.5).epsilon(1e-15));
  }

  SUBCASE("round trip on random interior points") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> rad(0.55, 1.45);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double a = ang(rng), r = rad(rng);
      // sample the computational domain via the inverse map of a physical point
      const Vec3 z{r * std::cos(a), r * std::sin(a), 0};
      const Vec3 x = blend.inverse(z);
      const Vec3 back = blend.forward(x);
      worst = std::max(worst, dist(back, z) / norm(z));
    }
    CHECK(worst < 1e-12);
  }

  SUBCASE("jacobian matches finite differences") {
    const Vec3 x{0.8, 0.35, 0};
    const auto jac = blend.jacobian(x);
    const double eps = 1e-7;
    for (int c = 0; c < 2; ++c) {
      Vec3 xp = x, xm = x;
      xp[c] += eps;
      xm[c] -= eps;
      const Vec3 d = (1.0 / (2.0 * eps)) * (blend.forward(xp) - blend.forward(xm));
      CHECK(jac[0 + c] == doctest::Approx(d.x).epsilon(1e-6));
      CHECK(jac[3 + c] == doctest::Approx(d.y).epsilon(1e-6));
    }
  }
}

TEST_CASE("min_edge_length on structured and blended meshes") {
  const auto square0 = mesh::refine(mesh::make_unit_square(), 0);
  CHECK(mesh::min_edge_length(square0) == doctest::Approx(1.0).epsilon(1e-15));
  const auto square4 = mesh::refine(mesh::make_unit_square(), 4);
  CHECK(mesh::min_edge_length(square4) == doctest::Approx(1.0 / 16.0).epsilon(1e-15));

  const auto annulus = mesh::refine(mesh::make_annulus(0.5, 1.5, 12, 4), 3,
                                    mesh::BlendingMap::annulus(0.5, 1.5, 12));
  // brute-force scan over all physical edges of the finest level
  const auto& fine = annulus.finest();
  double shortest = 1e300;
  for (const auto& e : fine.elements)
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        shortest = std::min(shortest, dist(fine.vertices_phys[static_cast<std::size_t>(e[a])],
                                           fine.vertices_phys[static_cast<std::size_t>(e[b])]));
  CHECK(mesh::min_edge_length(annulus) == doctest::Approx(shortest).epsilon(1e-15));
}

TEST_CASE("checked blend clamps near the hull and rejects farther points") {
  const auto h = mesh::refine(mesh::make_unit_square(), 2);
  const Vec3 inside{0.3, 0.7, 0};
  const auto same = h.blend(inside, mesh::MeshHierarchy::BlendDirection::Forward);
  CHECK(same.x == inside.x);
  CHECK(same.y == inside.y);

  const Vec3 barely{1.0 + 5e-11, 0.5, 0};
  const auto clamped = h.blend(barely, mesh::MeshHierarchy::BlendDirection::Forward);
  CHECK(clamped.x == doctest::Approx(1.0).epsilon(1e-12));

  const Vec3 far{1.1, 0.5, 0};
  CHECK_THROWS_AS(h.blend(far, mesh::MeshHierarchy::BlendDirection::Forward), OutOfDomainError);
}

TEST_CASE("degenerate coarse elements are rejected with their index") {
  CoarseMesh m = single_triangle();
  m.vertices[2] = {2.0, 0.0, 0.0};  // collinear
  try {
    mesh::refine(m, 1);
    FAIL("expected GeometryError");
  } catch (const GeometryError& e) {
    CHECK(e.element_index == 0);
  }
}

TEST_CASE("mesh text format round trips") {
  const auto m = mesh::make_annulus(0.5, 1.5, 6, 2);
  std::stringstream s;
  mesh::write_coarse_mesh(s, m);
  const auto back = mesh::read_coarse_mesh(s);
  CHECK(back.vertices.size() == m.vertices.size());
  CHECK(back.elements == m.elements);
  REQUIRE(back.boundary.size() == m.boundary.size());
  for (std::size_t i = 0; i < m.boundary.size(); ++i) {
    CHECK(back.boundary[i].vertices == m.boundary[i].vertices);
    CHECK(back.boundary[i].tag == m.boundary[i].tag);
  }
  for (std::size_t i = 0; i < m.vertices.size(); ++i)
    CHECK(dist(back.vertices[i], m.vertices[i]) == 0.0);
}

TEST_CASE("malformed meshes are rejected") {
  CoarseMesh m = single_triangle();
  SUBCASE("untagged boundary facet") {
    m.boundary.pop_back();
    CHECK_THROWS_AS(m.validate(), ConfigError);
  }
  SUBCASE("doubly tagged facet") {
    m.boundary.push_back(m.boundary.front());
    CHECK_THROWS_AS(m.validate(), ConfigError);
  }
  SUBCASE("unknown tag string") {
    CHECK_THROWS_AS(mesh::boundary_tag_from_string("Robin"), ConfigError);
  }
}

TEST_CASE("macro-primitive graph is dense, typed and stable") {
  const auto h = mesh::refine(mesh::make_unit_square(2, 2), 1);
  const auto& prims = h.primitives();
  for (std::size_t i = 0; i < prims.size(); ++i) CHECK(prims[i].id == static_cast<std::int64_t>(i));
  CHECK(h.volume_count() == 8);
  for (const auto& p : prims) {
    if (p.kind == mesh::PrimitiveKind::Volume) continue;
    // interface neighbors are volumes
    for (const auto n : p.neighbors) CHECK(n < h.volume_count());
    CHECK(!p.neighbors.empty());
    CHECK(h.anchor_volume(p.id) == static_cast<std::int32_t>(p.neighbors.front()));
  }
  // identical input produces identical ids
  const auto h2 = mesh::refine(mesh::make_unit_square(2, 2), 1);
  REQUIRE(h2.primitives().size() == prims.size());
  for (std::size_t i = 0; i < prims.size(); ++i) {
    CHECK(h2.primitives()[i].kind == prims[i].kind);
    CHECK(h2.primitives()[i].corners == prims[i].corners);
  }
}

TEST_SUITE_END();
