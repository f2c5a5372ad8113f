#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmoc/scheme.hpp"

namespace mmoc::bench {

/// Benchmark initial conditions and analytic references.
namespace ic {
/// Slotted cylinder + cone + cosine hill on circles of radius 0.15.
double rotation_bodies(const Vec3& x);
double rotation_hill(const Vec3& x);
/// Indicator of the half-space x_1 < 0.5.
double swirl_initial(const Vec3& x);
/// Time factor g(t) = cos(pi t / T) applies on top of this spatial part.
Vec3 swirl_velocity(const Vec3& x);
/// Rotating Gaussian hill, c(x, t) = exp(-r^2/(4 t kappa)) / (4 pi t kappa)
/// centered at the rotation of (0, 1) by angle t.
double annulus_solution(const Vec3& x, double t, double kappa);
double blankenbach_initial(const Vec3& x, double length, double height);
}  // namespace ic

/// One line of the per-step metric report. Optional entries stay empty in the
/// CSV when the benchmark has no exact solution (or no flow).
struct MetricRow {
  std::int64_t step = 0;
  double t = 0.0;
  double tau = 0.0;
  std::optional<double> h0_error;
  std::optional<double> var;
  std::optional<double> e_peak;
  std::optional<double> delta_m;
  std::optional<double> u_rms;
  std::optional<double> nu;
  std::uint64_t particles_migrated = 0;
  std::uint64_t clamps = 0;
};

/// Benchmark configuration; unset numeric fields (negative / zero) resolve to
/// the per-benchmark defaults listed in resolve().
struct BenchmarkSpec {
  std::string name;  // rotation2d | swirl3d | annulus_ad | blankenbach | demo_pipe
  int level = -1;
  int degree = 0;
  double tau = 0.0;
  double cfl = 0.0;
  std::int64_t lookback = 0;  // -1 = infinite
  double kappa = -1.0;
  double theta = -1.0;
  double rayleigh = -1.0;
  double t_end = 0.0;
  int ranks = 1;
  std::string out_dir;
  int vtk_every = 0;
  std::uint64_t seed = 0;  // reserved; no numerical effect
  std::string variant;     // rotation2d: bodies|hill; blankenbach: case3|conduction
  bool verbose = false;

  /// Fill defaults and validate the combination. Throws ConfigError.
  BenchmarkSpec resolve() const;
};

/// `text` is either a JSON object or "key = value" lines mirroring the
/// BenchmarkSpec fields.
BenchmarkSpec parse_spec(const std::string& text);
BenchmarkSpec parse_spec_file(const std::string& path);

struct BandCheck {
  std::string metric;
  double measured = 0.0;
  std::string requirement;
  std::string source;  // published | self_reference
  bool passed = false;
};

struct BenchmarkReport {
  BenchmarkSpec spec;
  std::vector<MetricRow> rows;
  std::map<std::string, double> summary;
  transport::TransportStats transport_totals;
  std::vector<BandCheck> band_checks;
  bool within_bands = true;
  double runtime_seconds = 0.0;

  const MetricRow& final_row() const { return rows.back(); }
};

/// Error/energy metrics of a computed field:
///   h0    = sqrt(e^T M e), e = exact - computed
///   var   = max_j c_j - min_j c_j
///   e_peak= max_j c_j / max_j exact_j - 1
///   dm    = (1^T M c) / m0 - 1
MetricRow compute_metrics(const fem::ScalarField& c, const fem::ScalarField* c_exact,
                          const fem::SparseOperator& mass, double m0);

/// Root-mean-square velocity and Nusselt number on a [0,L]x[0,H] box; the top
/// gradient uses one-sided element derivative traces with line quadrature.
std::pair<double, double> compute_flow_diagnostics(const fem::VectorField& u,
                                                   const fem::ScalarField& c,
                                                   const fem::SparseOperator& velocity_mass,
                                                   double length, double height);

void write_csv(const std::string& path, const std::vector<MetricRow>& rows);

/// Execute a benchmark to its end time, writing CSV/VTK when an output
/// directory is configured, and compare the final metrics against the
/// embedded expected bands where defined.
BenchmarkReport run(const BenchmarkSpec& spec);

}  // namespace mmoc::bench
