#include <benchmark/benchmark.h>

#include "mmoc/diffusion.hpp"
#include "mmoc/stokes.hpp"

using namespace mmoc;

namespace {

void BM_AssembleMassP2(benchmark::State& state) {
  static mesh::MeshHierarchy h(mesh::make_unit_square(4, 4), 4);
  static fem::FunctionSpace space(h, 2);
  for (auto _ : state) {
    auto M = fem::assemble(space, fem::OperatorKind::Mass);
    benchmark::DoNotOptimize(M);
  }
  state.SetItemsProcessed(state.iterations() * space.element_count());
}
BENCHMARK(BM_AssembleMassP2)->Unit(benchmark::kMillisecond);

void BM_DiffusionStep(benchmark::State& state) {
  static mesh::MeshHierarchy h(mesh::make_unit_square(4, 4), 4);
  static fem::FunctionSpace space(h, 2);
  static diffusion::ThetaSystem sys = [] {
    diffusion::ThetaSystem s(space, 1e-5, 1.0);
    s.set_tau(0.1);
    return s;
  }();
  static auto c = fem::interpolate(
      [](const Vec3& x) { return std::exp(-30 * ((x.x - 0.5) * (x.x - 0.5) + x.y * x.y)); },
      space);
  for (auto _ : state) {
    auto out = diffusion::diffusion_step(c, sys, {}, nullptr, 0.1);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_DiffusionStep)->Unit(benchmark::kMillisecond);

void BM_StokesSolveWarm(benchmark::State& state) {
  static mesh::MeshHierarchy h(mesh::make_rectangle(1.5, 1.0, 3, 2), 3);
  static stokes::StokesSystem sys(h, 1.0, stokes::InnerSolver::FactorizedCholesky);
  static auto c = fem::interpolate(
      [](const Vec3& x) { return 0.5 * (1 - x.y * x.y); }, sys.velocity_space());
  static stokes::BoussinesqForce force{216000.0, [](const Vec3&) { return Vec3{0, 1, 0}; }};
  fem::VectorField u(sys.velocity_space());
  fem::ScalarField p(sys.pressure_space());
  const auto rhs = sys.assemble_force(c, force);
  for (auto _ : state) {
    auto info = sys.solve(rhs, u, p);
    benchmark::DoNotOptimize(info);
  }
}
BENCHMARK(BM_StokesSolveWarm)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
