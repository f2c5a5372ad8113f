#include <benchmark/benchmark.h>

#include <random>

#include "mmoc/locate.hpp"

using namespace mmoc;

namespace {

struct EvalFixture {
  mesh::MeshHierarchy h;
  fem::FunctionSpace space;
  fem::FieldEvaluator eval;
  fem::ScalarField field;
  std::vector<Vec3> points;

  EvalFixture(int degree, int level)
      : h(mesh::make_unit_square(4, 4), level),
        space(h, degree),
        eval(h),
        field(fem::interpolate(
            [](const Vec3& x) { return std::sin(3 * x.x) * std::cos(2 * x.y); }, space)) {
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> uni(0.001, 0.999);
    points.resize(4096);
    for (auto& p : points) p = {uni(rng), uni(rng), 0};
  }
};

void BM_EvaluateP1(benchmark::State& state) {
  static EvalFixture fx(1, 5);
  std::size_t i = 0;
  for (auto _ : state) {
    const double v = fx.eval.evaluate(fx.field, fx.points[i++ & 4095], 0);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_EvaluateP1);

void BM_EvaluateP2(benchmark::State& state) {
  static EvalFixture fx(2, 5);
  std::size_t i = 0;
  for (auto _ : state) {
    const double v = fx.eval.evaluate(fx.field, fx.points[i++ & 4095], 0);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_EvaluateP2);

// hinted locate with a coherent walk: the common transport access pattern
void BM_LocateCoherent(benchmark::State& state) {
  static EvalFixture fx(1, 5);
  Vec3 p{0.511, 0.497, 0};
  std::int32_t hint = 0;
  double angle = 0.0;
  for (auto _ : state) {
    angle += 1e-3;
    Vec3 q{0.5 + 0.3 * std::cos(angle), 0.5 + 0.3 * std::sin(angle), 0};
    const auto loc = fx.eval.locate(q, hint, fem::OutsidePolicy::Clamp);
    hint = loc.macro;
    benchmark::DoNotOptimize(loc);
  }
  benchmark::DoNotOptimize(p);
}
BENCHMARK(BM_LocateCoherent);

}  // namespace
