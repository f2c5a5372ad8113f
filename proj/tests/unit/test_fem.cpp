#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "mmoc/assembly.hpp"
#include "mmoc/error.hpp"
#include "mmoc/locate.hpp"
#include "mmoc/vtk.hpp"

using namespace mmoc;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// exact integral of x^a y^b z^c over the reference simplex
double simplex_monomial(int dim, int a, int b, int c) {
  return factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + dim);
}

}  // namespace

TEST_SUITE_BEGIN("fem");

TEST_CASE("quadrature rules integrate monomials exactly") {
  for (const int dim : {2, 3}) {
    for (const int degree : {2, 4, 6}) {
      if (dim == 3 && degree == 6) continue;
      const auto& rule = fem::simplex_rule(dim, degree);
      const int exact_up_to = dim == 3 && degree > 2 ? 5 : degree;
      for (int a = 0; a + 0 <= exact_up_to; ++a)
        for (int b = 0; a + b <= exact_up_to; ++b)
          for (int c = 0; a + b + c <= exact_up_to && (dim == 3 || c == 0); ++c) {
            double acc = 0.0;
            for (const auto& pt : rule.points)
              acc += pt.weight * std::pow(pt.lambda[1], a) * std::pow(pt.lambda[2], b) *
                     std::pow(dim == 3 ? pt.lambda[3] : 0.0, c) *
                     (dim == 3 || c == 0 ? 1.0 : 0.0);
            // weights are normalized by the simplex measure
            const double exact = simplex_monomial(dim, a, b, c) * factorial(dim);
            CHECK(acc == doctest::Approx(exact).epsilon(1e-12));
          }
    }
  }
}

TEST_CASE("mass matrix row sums form a partition of unity") {
  const auto h = mesh::refine(mesh::make_unit_square(), 4);
  for (const int degree : {1, 2}) {
    const fem::FunctionSpace space(h, degree);
    const auto M = fem::assemble(space, fem::OperatorKind::Mass);
    double total = 0.0;
    for (std::int64_t i = 0; i < M.size(); ++i) total += M.row_sum(i);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("stiffness annihilates constants") {
  const auto h = mesh::refine(mesh::make_unit_square(), 4);
  const fem::FunctionSpace space(h, 2);
  const auto A = fem::assemble(space, fem::OperatorKind::Stiffness);
  std::vector<double> ones(static_cast<std::size_t>(space.dof_count()), 1.0);
  const auto y = A.multiply(ones);
  for (const auto v : y) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("assembled operators are exactly symmetric") {
  const auto h = mesh::refine(mesh::make_annulus(0.5, 1.5, 12, 4), 2,
                              mesh::BlendingMap::annulus(0.5, 1.5, 12));
  const fem::FunctionSpace space(h, 2);
  CHECK(fem::assemble(space, fem::OperatorKind::Mass).max_asymmetry() <= 1e-13);
  CHECK(fem::assemble(space, fem::OperatorKind::Stiffness).max_asymmetry() <= 1e-13);
}

TEST_CASE("blended annulus mass equals the annulus area") {
  const auto h = mesh::refine(mesh::make_annulus(0.5, 1.5, 12, 4), 3,
                              mesh::BlendingMap::annulus(0.5, 1.5, 12));
  const fem::FunctionSpace space(h, 2);
  const auto M = fem::assemble(space, fem::OperatorKind::Mass);
  double total = 0.0;
  for (std::int64_t i = 0; i < M.size(); ++i) total += M.row_sum(i);

  // independent area oracle: raise the quadrature order until converged
  const double a4 = fem::domain_measure(h, 4);
  const double a6 = fem::domain_measure(h, 6);
  CHECK(std::abs(a6 - a4) < 1e-9 * a6);
  CHECK(total == doctest::Approx(a6).epsilon(1e-9));
  CHECK(total == doctest::Approx(2.0 * M_PI).epsilon(1e-6));

  // quadrature error shrinks with refinement
  const auto h4 = mesh::refine(mesh::make_annulus(0.5, 1.5, 12, 4), 4,
                               mesh::BlendingMap::annulus(0.5, 1.5, 12));
  CHECK(std::abs(fem::domain_measure(h4, 4) - 2.0 * M_PI) <
        0.5 * std::abs(a4 - 2.0 * M_PI));
}

TEST_CASE("evaluate reproduces P1 and P2 polynomials") {
  const auto h = mesh::refine(mesh::make_unit_square(2, 2), 3);
  const fem::FieldEvaluator eval(h);

  SUBCASE("linear reproduction, P1") {
    const fem::FunctionSpace space(h, 1);
    const auto f = fem::interpolate([](const Vec3& x) { return x.x; }, space);
    CHECK(eval.evaluate(f, Vec3{0.37, 0.81, 0}, 0) == doctest::Approx(0.37).epsilon(1e-14));
  }

  SUBCASE("quadratic reproduction, P2") {
    const fem::FunctionSpace space(h, 2);
    const auto f = fem::interpolate(
        [](const Vec3& x) { return x.x * x.x + 0.5 * x.x * x.y - x.y * x.y; }, space);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      const Vec3 z{uni(rng), uni(rng), 0};
      const double exact = z.x * z.x + 0.5 * z.x * z.y - z.y * z.y;
      CHECK(eval.evaluate(f, z, 0) == doctest::Approx(exact).epsilon(1e-12));
    }
  }
}

TEST_CASE("evaluation is independent of the starting primitive") {
  const auto h = mesh::refine(mesh::make_unit_square(2, 2), 3);
  const fem::FunctionSpace space(h, 2);
  const fem::FieldEvaluator eval(h);
  const auto f = fem::interpolate(
      [](const Vec3& x) { return std::sin(3 * x.x) * std::cos(2 * x.y); }, space);

  SUBCASE("macro-interface point from both adjacent volumes") {
    // x = 0.5 is a macro interface of the 2x2 coarse grid
    const Vec3 z{0.5, 0.3, 0};
    double vals[8];
    for (std::int32_t hintv = 0; hintv < h.volume_count(); ++hintv)
      vals[hintv] = eval.evaluate(f, z, hintv);
    for (std::int32_t hintv = 1; hintv < h.volume_count(); ++hintv)
      CHECK(std::abs(vals[hintv] - vals[0]) <= 1e-14);
  }

  SUBCASE("random interior points with every hint") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> uni(0.01, 0.99);
    for (int k = 0; k < 25; ++k) {
      const Vec3 z{uni(rng), uni(rng), 0};
      const double ref = eval.evaluate(f, z, 0);
      for (std::int32_t hintv = 1; hintv < h.volume_count(); ++hintv)
        CHECK(std::abs(eval.evaluate(f, z, hintv) - ref) <= 1e-14);
    }
  }
}

TEST_CASE("interpolation hits nodal values") {
  const auto h = mesh::refine(mesh::make_unit_square(4, 4), 5);
  const fem::FunctionSpace space(h, 1);

  SUBCASE("constants") {
    const auto f = fem::interpolate([](const Vec3&) { return 1.0; }, space);
    for (const auto v : f.coeffs) CHECK(v == 1.0);
  }

  SUBCASE("cosine hill peaks at its center DoF") {
    // h = 1/128: (0.25, 0.5) is a grid vertex carrying the peak value 0.5
    const auto f = fem::interpolate(
        [](const Vec3& x) {
          const double r = std::hypot(x.x - 0.25, x.y - 0.5) / 0.15;
          return r <= 1.0 ? 0.25 * (1.0 + std::cos(M_PI * r)) : 0.0;
        },
        space);
    double peak = 0.0;
    for (const auto v : f.coeffs) peak = std::max(peak, v);
    CHECK(peak == doctest::Approx(0.5).epsilon(1e-15));
  }

  SUBCASE("indicator functions stay binary") {
    const auto f = fem::interpolate(
        [](const Vec3& x) {
          const double r = std::hypot(x.x - 0.5, x.y - 0.75) / 0.15;
          return (r <= 1.0 && (std::abs(x.x - 0.5) >= 0.025 || x.y >= 0.85)) ? 1.0 : 0.0;
        },
        space);
    for (const auto v : f.coeffs) CHECK((v == 0.0 || v == 1.0));
  }
}

TEST_CASE("assembled operators match per-element accumulation") {
  const auto h = mesh::refine(mesh::make_unit_square(2, 2), 2);
  const fem::FunctionSpace space(h, 2);
  const auto M = fem::assemble(space, fem::OperatorKind::Mass);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(space.dof_count()));
  for (auto& v : x) v = uni(rng);
  const auto y = M.multiply(x);

  // independent accumulation: per-element local mass times the gathered x
  std::vector<double> y2(x.size(), 0.0);
  const auto& rule = fem::simplex_rule(2, 4);
  const int dpe = space.dofs_per_element();
  const auto& lat = h.lattice(h.max_level());
  const auto lat_count = static_cast<std::int64_t>(lat.element_count());
  fem::ElementGeometry geo;
  std::vector<double> shape(static_cast<std::size_t>(dpe));
  std::int64_t dofs[10];
  for (std::int64_t e = 0; e < static_cast<std::int64_t>(space.element_count()); ++e) {
    fem::element_geometry(h, e, rule, geo);
    space.element_dofs(static_cast<std::int32_t>(e / lat_count),
                       static_cast<std::int32_t>(e % lat_count), dofs);
    for (int q = 0; q < geo.nq; ++q) {
      space.shape(rule.points[static_cast<std::size_t>(q)].lambda.data(), shape.data());
      double fx = 0.0;
      for (int j = 0; j < dpe; ++j) fx += shape[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(dofs[j])];
      for (int i = 0; i < dpe; ++i)
        y2[static_cast<std::size_t>(dofs[i])] += geo.weight[q] * shape[static_cast<std::size_t>(i)] * fx;
    }
  }
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(y[i] - y2[i]) <= 1e-13);
}

TEST_CASE("out-of-domain evaluation honors the policy") {
  const auto h = mesh::refine(mesh::make_unit_square(), 3);
  const fem::FunctionSpace space(h, 1);
  const fem::FieldEvaluator eval(h);
  const auto f = fem::interpolate([](const Vec3& x) { return x.x; }, space);

  CHECK_THROWS_AS(eval.evaluate(f, Vec3{1.25, 0.5, 0}, 0), OutOfDomainError);

  fem::EvalStats stats;
  const double v =
      eval.evaluate(f, Vec3{1.25, 0.5, 0}, 0, fem::OutsidePolicy::Clamp, &stats);
  CHECK(v == doctest::Approx(1.0).epsilon(1e-12));  // clamped to the right edge
  CHECK(stats.clamps == 1);
}

TEST_CASE("vtk writer emits a parsable unstructured grid") {
  const auto h = mesh::refine(mesh::make_unit_square(), 2);
  const fem::FunctionSpace space(h, 2);
  const auto f = fem::interpolate([](const Vec3& x) { return x.y; }, space);
  const std::string path = "test_field.vtk";
  fem::write_vtk(path, h, "c", f);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# vtk DataFile Version 3.0");
  std::getline(in, line);  // title
  std::getline(in, line);
  CHECK(line == "ASCII");
  std::getline(in, line);
  CHECK(line == "DATASET UNSTRUCTURED_GRID");
  std::string word;
  std::size_t n = 0;
  in >> word >> n;
  CHECK(word == "POINTS");
  CHECK(n == h.finest().vertex_count());
  std::remove(path.c_str());
}

TEST_SUITE_END();
