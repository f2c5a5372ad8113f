#include <benchmark/benchmark.h>

#include "mmoc/transport.hpp"

using namespace mmoc;

namespace {

// one full RK4 backtrack sweep over all particles of a 16k-DoF grid
void BM_BacktrackSweep(benchmark::State& state) {
  static mesh::MeshHierarchy h(mesh::make_unit_square(4, 4), 5);
  static fem::FunctionSpace space(h, 1);
  static fem::FieldEvaluator eval(h);
  static auto layout = partition::partition_mesh(h, static_cast<int>(state.range(0)) > 0 ? 1 : 1);
  static auto u = fem::interpolate(
      fem::VectorFunction([](const Vec3& x) { return Vec3{0.5 - x.y, x.x - 0.5, 0}; }), space);
  transport::ParticleSwarm swarm(space, layout);
  const auto rk = transport::RKScheme::rk4();
  transport::TransportStats stats;
  double t = 0.0;
  for (auto _ : state) {
    transport::VelocityPair vp{&u, &u, t, t + 1e-3};
    transport::backtrack(swarm, vp, rk, eval, stats);
    t += 1e-3;
  }
  state.SetItemsProcessed(state.iterations() * swarm.total() * rk.stages);
}
BENCHMARK(BM_BacktrackSweep)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_DepartureEvaluation(benchmark::State& state) {
  static mesh::MeshHierarchy h(mesh::make_unit_square(4, 4), 5);
  static fem::FunctionSpace space(h, 1);
  static fem::FieldEvaluator eval(h);
  static auto layout = partition::partition_mesh(h, 1);
  static auto c = fem::interpolate([](const Vec3& x) { return x.x * x.y; }, space);
  static auto u = fem::interpolate(
      fem::VectorFunction([](const Vec3& x) { return Vec3{0.5 - x.y, x.x - 0.5, 0}; }), space);
  transport::ParticleSwarm swarm(space, layout);
  transport::TransportStats stats;
  transport::VelocityPair vp{&u, &u, 0.0, 1e-2};
  transport::backtrack(swarm, vp, transport::RKScheme::rk4(), eval, stats);
  for (auto _ : state) {
    auto out = transport::evaluate_departure(swarm, c, eval, stats);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * swarm.total());
}
BENCHMARK(BM_DepartureEvaluation)->Unit(benchmark::kMillisecond);

}  // namespace
