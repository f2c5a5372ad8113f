#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "mmoc/locate.hpp"
#include "mmoc/partition.hpp"

namespace mmoc::transport {

/// Explicit Runge-Kutta scheme as a Butcher tableau (a strictly lower
/// triangular).
struct RKScheme {
  static constexpr int kMaxStages = 6;
  int stages = 0;
  double a[kMaxStages][kMaxStages] = {};
  double b[kMaxStages] = {};
  double c[kMaxStages] = {};
  int order = 0;

  static RKScheme explicit_euler();
  static RKScheme heun2();
  static RKScheme rk4();
  static RKScheme from_butcher(int stages, const double* a, const double* b, const double* c,
                               int order);
};

/// Tracer particle: carries the identity of the DoF it serves, its current
/// physical position and the RK stage buffer of the running integration.
struct Particle {
  std::int64_t dof_index = -1;
  std::int64_t origin_primitive = -1;
  std::int32_t origin_rank = 0;
  std::int32_t current_volume = 0;  // volume primitive containing `position`
  Vec3 base;                        // arrival point of the interval being integrated
  Vec3 position;
  Vec3 stage_values[RKScheme::kMaxStages];
  fem::ElementLocation location;  // cached from the last synchronization
  double departure_value = 0.0;
};

/// Velocity fields at both ends of a time interval, linearly interpolated in
/// between.
struct VelocityPair {
  const fem::VectorField* u_old = nullptr;
  const fem::VectorField* u_new = nullptr;
  double t_old = 0.0;
  double t_new = 0.0;
};

/// Linear time interpolation of the pair at (y, t*); t* must lie inside the
/// interval.
Vec3 interp_velocity(const VelocityPair& vp, const fem::FieldEvaluator& eval, const Vec3& y,
                     double t_star, std::int64_t hint_primitive);

struct TransportStats {
  std::uint64_t migrated = 0;
  std::uint64_t clamps = 0;
  std::uint64_t global_scans = 0;

  void reset() { *this = TransportStats{}; }
  TransportStats& operator+=(const TransportStats& o) {
    migrated += o.migrated;
    clamps += o.clamps;
    global_scans += o.global_scans;
    return *this;
  }
};

/// Particles distributed over the ranks of a layout; every particle is owned
/// by exactly one rank and each rank keeps its list sorted by
/// (origin_primitive, dof_index).
class ParticleSwarm {
 public:
  ParticleSwarm(const fem::FunctionSpace& space, const partition::PartitionLayout& layout);

  const fem::FunctionSpace& space() const { return *space_; }
  const partition::PartitionLayout& layout() const { return *layout_; }
  int rank_count() const { return layout_->rank_count; }

  std::vector<Particle>& rank_particles(int r) { return per_rank_[static_cast<std::size_t>(r)]; }
  const std::vector<Particle>& rank_particles(int r) const {
    return per_rank_[static_cast<std::size_t>(r)];
  }
  std::int64_t total() const;

  /// Seed one particle per DoF at its physical coordinate; interface particles
  /// are assigned to the lowest-id adjacent volume primitive.
  void reset_to_dofs();

  /// Migrate every particle to the rank owning its containing volume
  /// primitive; destination is decided by the previous owner. Batches are
  /// applied in deterministic (source, destination, key) order.
  partition::ExchangeStats synchronize();

 private:
  const fem::FunctionSpace* space_;
  const partition::PartitionLayout* layout_;
  std::vector<std::vector<Particle>> per_rank_;
  std::vector<std::vector<std::int64_t>> seed_order_;  // per rank, key-sorted DoFs
};

ParticleSwarm create_particles(const fem::FunctionSpace& space,
                               const partition::PartitionLayout& layout);

/// One backward RK integration sweep over [vp.t_old, vp.t_new] applied to the
/// current particle positions (position becomes the departure point of the
/// interval). Positions are synchronized after every stage proposal and after
/// the final combination; stage points leaving the domain are clamped to the
/// boundary and counted.
void backtrack(ParticleSwarm& swarm, const VelocityPair& vp, const RKScheme& rk,
               const fem::FieldEvaluator& eval, TransportStats& stats);

/// Evaluate `c` at the particle positions and route each value back to the
/// DoF the particle was created for.
fem::ScalarField evaluate_departure(ParticleSwarm& swarm, const fem::ScalarField& c,
                                    const fem::FieldEvaluator& eval, TransportStats& stats);

/// Ring buffer for look-back advection: the temperature fields and velocity
/// intervals of the last `b` steps. For b = infinity the stored field is
/// always the initial one; with a steady velocity the particles are
/// persistent (positions accumulate, never re-seeded), otherwise every step
/// re-integrates the characteristic through the recorded velocity history
/// newest-interval first. Velocity snapshots are recorded assuming
/// vp.u_old of a step equals vp.u_new of the previous one.
class LookBackBuffer {
 public:
  static constexpr std::int64_t kInfinite = -1;

  LookBackBuffer(const fem::FunctionSpace& space, const partition::PartitionLayout& layout,
                 std::int64_t lookback, fem::ScalarField initial, bool steady_velocity = false);

  std::int64_t lookback() const { return lookback_; }
  bool infinite() const { return lookback_ == kInfinite; }

  /// Store the accepted field of the step just completed (finite b only).
  void store_field(const fem::ScalarField& c);

  /// Record a velocity interval and return the advected field at vp.t_new.
  fem::ScalarField advance(const VelocityPair& vp, const RKScheme& rk,
                           const fem::FieldEvaluator& eval, TransportStats& stats);

 private:
  const fem::FunctionSpace* space_;
  const partition::PartitionLayout* layout_;
  std::int64_t lookback_;
  bool steady_;
  std::deque<fem::ScalarField> fields_;   // newest at back; front is t_{n+1-depth}
  std::deque<fem::VectorField> history_;  // velocity snapshots u(t_k), newest at back
  std::deque<double> history_t_;
  std::optional<ParticleSwarm> swarm_;  // persistent for steady b = inf, re-seeded otherwise
  fem::ScalarField initial_;
};

/// Single-interval advection (look-back 1): backtrack from the DoFs over vp
/// and evaluate `c` at the departure points.
fem::ScalarField advect_once(const fem::FunctionSpace& space,
                             const partition::PartitionLayout& layout, const VelocityPair& vp,
                             const RKScheme& rk, const fem::ScalarField& c,
                             const fem::FieldEvaluator& eval, TransportStats& stats);

}  // namespace mmoc::transport
