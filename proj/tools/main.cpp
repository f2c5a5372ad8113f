#include <CLI11.hpp>
#include <iostream>

#include "mmoc/bench.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Eulerian-Lagrangian transport benchmarks on block-structured simplex meshes"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run a benchmark described by a spec file");
  std::string spec_path;
  std::string inline_spec;
  int ranks = 0;
  std::string out_dir;
  int vtk_every = -1;
  std::uint64_t seed = 0;
  bool verbose = false;
  run_cmd->add_option("--spec", spec_path, "spec file (JSON or key = value lines)");
  run_cmd->add_option("--spec-json", inline_spec, "inline JSON spec");
  run_cmd->add_option("--ranks", ranks, "number of in-process ranks");
  run_cmd->add_option("--out", out_dir, "output directory for CSV/VTK");
  run_cmd->add_option("--vtk-every", vtk_every, "VTK dump interval in steps (0 = off)");
  run_cmd->add_option("--seed", seed, "reserved; no numerical effect");
  run_cmd->add_flag("--verbose", verbose, "per-step log lines");

  CLI11_PARSE(app, argc, argv);

  try {
    mmoc::bench::BenchmarkSpec spec;
    if (!spec_path.empty())
      spec = mmoc::bench::parse_spec_file(spec_path);
    else if (!inline_spec.empty())
      spec = mmoc::bench::parse_spec(inline_spec);
    else {
      std::cerr << "run: provide --spec or --spec-json\n";
      return 2;
    }
    if (ranks > 0) spec.ranks = ranks;
    if (!out_dir.empty()) spec.out_dir = out_dir;
    if (vtk_every >= 0) spec.vtk_every = vtk_every;
    if (seed != 0) spec.seed = seed;
    if (verbose) spec.verbose = true;

    const auto report = mmoc::bench::run(spec);
    std::cout.precision(12);
    std::cout << report.spec.name << ": " << report.rows.size() - 1 << " steps in "
              << report.runtime_seconds << " s\n";
    for (const auto& [k, v] : report.summary) std::cout << "  " << k << " = " << v << '\n';
    std::cout << "  particles migrated = " << report.transport_totals.migrated
              << ", clamps = " << report.transport_totals.clamps
              << ", global scans = " << report.transport_totals.global_scans << '\n';
    bool ok = true;
    for (const auto& bc : report.band_checks) {
      std::cout << (bc.passed ? "  [PASS] " : "  [FAIL] ") << bc.metric << " = " << bc.measured
                << " (" << bc.requirement << ", " << bc.source << ")\n";
      ok = ok && bc.passed;
    }
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
