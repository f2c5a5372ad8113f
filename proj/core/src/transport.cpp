#include "mmoc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmoc/error.hpp"

namespace mmoc::transport {

RKScheme RKScheme::explicit_euler() {
  RKScheme s;
  s.stages = 1;
  s.b[0] = 1.0;
  s.order = 1;
  return s;
}

RKScheme RKScheme::heun2() {
  RKScheme s;
  s.stages = 2;
  s.a[1][0] = 1.0;
  s.b[0] = 0.5;
  s.b[1] = 0.5;
  s.c[1] = 1.0;
  s.order = 2;
  return s;
}

RKScheme RKScheme::rk4() {
  RKScheme s;
  s.stages = 4;
  s.a[1][0] = 0.5;
  s.a[2][1] = 0.5;
  s.a[3][2] = 1.0;
  s.b[0] = 1.0 / 6.0;
  s.b[1] = 1.0 / 3.0;
  s.b[2] = 1.0 / 3.0;
  s.b[3] = 1.0 / 6.0;
  s.c[1] = 0.5;
  s.c[2] = 0.5;
  s.c[3] = 1.0;
  s.order = 4;
  return s;
}

RKScheme RKScheme::from_butcher(int stages, const double* a, const double* b, const double* c,
                                int order) {
  if (stages < 1 || stages > kMaxStages) throw ConfigError("RK scheme: unsupported stage count");
  RKScheme s;
  s.stages = stages;
  s.order = order;
  double bsum = 0.0;
  for (int i = 0; i < stages; ++i) {
    s.b[i] = b[i];
    s.c[i] = c[i];
    bsum += b[i];
    for (int j = 0; j < stages; ++j) {
      const double av = a[i * stages + j];
      if (j >= i && av != 0.0) throw ConfigError("RK scheme must be explicit (a strictly lower)");
      s.a[i][j] = av;
    }
  }
  if (std::abs(bsum - 1.0) > 1e-14) throw ConfigError("RK scheme: weights must sum to 1");
  return s;
}

Vec3 interp_velocity(const VelocityPair& vp, const fem::FieldEvaluator& eval, const Vec3& y,
                     double t_star, std::int64_t hint_primitive) {
  const double dt = vp.t_new - vp.t_old;
  if (!(dt > 0.0)) throw ConfigError("velocity pair: t_old must precede t_new");
  if (t_star < vp.t_old - 1e-14 * dt || t_star > vp.t_new + 1e-14 * dt)
    throw ConfigError("velocity interpolation time outside the interval");
  const double w_old = (vp.t_new - t_star) / dt;
  const double w_new = (t_star - vp.t_old) / dt;
  const Vec3 a = eval.evaluate(*vp.u_old, y, hint_primitive, fem::OutsidePolicy::Error);
  const Vec3 b = eval.evaluate(*vp.u_new, y, hint_primitive, fem::OutsidePolicy::Error);
  return w_old * a + w_new * b;
}

namespace {

bool key_less(const Particle& a, const Particle& b) {
  if (a.origin_primitive != b.origin_primitive) return a.origin_primitive < b.origin_primitive;
  return a.dof_index < b.dof_index;
}

}  // namespace

ParticleSwarm::ParticleSwarm(const fem::FunctionSpace& space,
                             const partition::PartitionLayout& layout)
    : space_(&space),
      layout_(&layout),
      per_rank_(static_cast<std::size_t>(layout.rank_count)),
      seed_order_(static_cast<std::size_t>(layout.rank_count)) {
  const auto& h = space.hierarchy();
  for (std::int64_t i = 0; i < space.dof_count(); ++i) {
    const auto anchor = h.anchor_volume(space.dof_owner(i));
    seed_order_[static_cast<std::size_t>(layout.rank_of(anchor))].push_back(i);
  }
  for (auto& order : seed_order_)
    std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
      const auto pa = space.dof_owner(a), pb = space.dof_owner(b);
      return pa != pb ? pa < pb : a < b;
    });
  reset_to_dofs();
}

std::int64_t ParticleSwarm::total() const {
  std::int64_t n = 0;
  for (const auto& r : per_rank_) n += static_cast<std::int64_t>(r.size());
  return n;
}

void ParticleSwarm::reset_to_dofs() {
  const auto& h = space_->hierarchy();
  for (int r = 0; r < rank_count(); ++r) {
    auto& list = per_rank_[static_cast<std::size_t>(r)];
    const auto& order = seed_order_[static_cast<std::size_t>(r)];
    list.clear();
    list.reserve(order.size());
    for (const auto i : order) {
      Particle p;
      p.dof_index = i;
      p.origin_primitive = space_->dof_owner(i);
      p.origin_rank = layout_->rank_of(p.origin_primitive);
      p.current_volume = h.anchor_volume(p.origin_primitive);
      p.position = space_->dof_coord(i);
      p.base = p.position;
      list.push_back(p);
    }
  }
}

partition::ExchangeStats ParticleSwarm::synchronize() {
  partition::ExchangeStats stats;
  const int R = rank_count();
  if (R == 1) return stats;

  // each rank decides the destination of its own particles
  std::vector<std::vector<std::vector<Particle>>> batches(
      static_cast<std::size_t>(R), std::vector<std::vector<Particle>>(static_cast<std::size_t>(R)));
  for (int r = 0; r < R; ++r) {
    auto& list = per_rank_[static_cast<std::size_t>(r)];
    std::size_t keep = 0;
    for (auto& p : list) {
      const auto dest = layout_->rank_of(p.current_volume);
      if (dest == r) {
        list[keep++] = p;
      } else {
        batches[static_cast<std::size_t>(r)][static_cast<std::size_t>(dest)].push_back(p);
        ++stats.migrated;
        stats.payload_bytes += sizeof(Particle);
      }
    }
    list.resize(keep);
  }
  // deterministic delivery: source-major, each batch already key-sorted
  for (int src = 0; src < R; ++src)
    for (int dst = 0; dst < R; ++dst) {
      auto& batch = batches[static_cast<std::size_t>(src)][static_cast<std::size_t>(dst)];
      if (batch.empty()) continue;
      auto& list = per_rank_[static_cast<std::size_t>(dst)];
      const auto mid = static_cast<std::ptrdiff_t>(list.size());
      list.insert(list.end(), batch.begin(), batch.end());
      std::inplace_merge(list.begin(), list.begin() + mid, list.end(), key_less);
    }
  return stats;
}

ParticleSwarm create_particles(const fem::FunctionSpace& space,
                               const partition::PartitionLayout& layout) {
  return ParticleSwarm(space, layout);
}

namespace {

// Locate (with boundary clamping) and assign the containing volume; returns
// whether the particle must migrate.
void locate_and_assign(Particle& p, const fem::FieldEvaluator& eval, fem::EvalStats& estats) {
  p.location = eval.locate(p.position, p.current_volume, fem::OutsidePolicy::Clamp, &estats);
  p.current_volume = p.location.macro;
}

}  // namespace

void backtrack(ParticleSwarm& swarm, const VelocityPair& vp, const RKScheme& rk,
               const fem::FieldEvaluator& eval, TransportStats& stats) {
  const double tau = vp.t_new - vp.t_old;
  if (!(tau > 0.0)) throw ConfigError("backtrack: time interval must have positive length");
  const auto& space = swarm.space();
  const int d = space.dim();
  const int R = swarm.rank_count();

  // stage velocity at t~ = t_new - c_s * tau: coefficient-level interpolation
  // w_old = c_s, w_new = 1 - c_s (exact for nodal fields)
  std::vector<const fem::VectorField*> stage_field(static_cast<std::size_t>(rk.stages));
  std::vector<fem::VectorField> storage;
  storage.reserve(static_cast<std::size_t>(rk.stages));
  for (int s = 0; s < rk.stages; ++s) {
    const double w_old = rk.c[s];
    if (w_old == 0.0) {
      stage_field[static_cast<std::size_t>(s)] = vp.u_new;
    } else if (w_old == 1.0) {
      stage_field[static_cast<std::size_t>(s)] = vp.u_old;
    } else {
      fem::VectorField mix(space, vp.t_new - rk.c[s] * tau);
      for (int c = 0; c < d; ++c) {
        auto& out = mix.component[static_cast<std::size_t>(c)].coeffs;
        const auto& uo = vp.u_old->component[static_cast<std::size_t>(c)].coeffs;
        const auto& un = vp.u_new->component[static_cast<std::size_t>(c)].coeffs;
        for (std::size_t i = 0; i < out.size(); ++i)
          out[i] = w_old * uo[i] + (1.0 - w_old) * un[i];
      }
      storage.push_back(std::move(mix));
      stage_field[static_cast<std::size_t>(s)] = &storage.back();
    }
  }

  fem::EvalStats estats;
  for (int s = 0; s < rk.stages; ++s) {
    // position proposal + synchronization
    for (int r = 0; r < R; ++r) {
      for (auto& p : swarm.rank_particles(r)) {
        if (s == 0) p.base = p.position;
        Vec3 y = p.base;
        for (int j = 0; j < s; ++j) y += (tau * rk.a[s][j]) * p.stage_values[j];
        p.position = y;
        locate_and_assign(p, eval, estats);
      }
    }
    stats.migrated += swarm.synchronize().migrated;
    // velocity evaluation on the owning rank
    const auto& field = *stage_field[static_cast<std::size_t>(s)];
    for (int r = 0; r < R; ++r)
      for (auto& p : swarm.rank_particles(r))
        p.stage_values[s] = -1.0 * eval.evaluate(field, p.location);
  }

  // combine stages into the departure point and synchronize once more
  for (int r = 0; r < R; ++r) {
    for (auto& p : swarm.rank_particles(r)) {
      Vec3 y = p.base;
      for (int j = 0; j < rk.stages; ++j) y += (tau * rk.b[j]) * p.stage_values[j];
      p.position = y;
      locate_and_assign(p, eval, estats);
    }
  }
  stats.migrated += swarm.synchronize().migrated;
  stats.clamps += estats.clamps;
  stats.global_scans += estats.global_scans;
}

fem::ScalarField evaluate_departure(ParticleSwarm& swarm, const fem::ScalarField& c,
                                    const fem::FieldEvaluator& eval, TransportStats& stats) {
  (void)stats;
  fem::ScalarField out(swarm.space());
  // evaluation on the owner, then values routed back to the origin rank and
  // scattered to the origin DoF
  const int R = swarm.rank_count();
  for (int r = 0; r < R; ++r)
    for (auto& p : swarm.rank_particles(r)) p.departure_value = eval.evaluate(c, p.location);
  for (int r = 0; r < R; ++r)
    for (const auto& p : swarm.rank_particles(r)) out[p.dof_index] = p.departure_value;
  return out;
}

LookBackBuffer::LookBackBuffer(const fem::FunctionSpace& space,
                               const partition::PartitionLayout& layout, std::int64_t lookback,
                               fem::ScalarField initial, bool steady_velocity)
    : space_(&space),
      layout_(&layout),
      lookback_(lookback),
      steady_(steady_velocity),
      initial_(std::move(initial)) {
  if (lookback != kInfinite && lookback < 1)
    throw ConfigError("look-back distance must be >= 1 or infinite");
  swarm_.emplace(space, layout);
  if (!infinite()) fields_.push_back(initial_);
}

void LookBackBuffer::store_field(const fem::ScalarField& c) {
  if (infinite()) return;  // the stored field is always the initial one
  fields_.push_back(c);
  while (static_cast<std::int64_t>(fields_.size()) > lookback_) fields_.pop_front();
}

fem::ScalarField LookBackBuffer::advance(const VelocityPair& vp, const RKScheme& rk,
                                         const fem::FieldEvaluator& eval, TransportStats& stats) {
  if (infinite() && steady_) {
    // interval maps coincide for a steady velocity: accumulate incrementally
    backtrack(*swarm_, vp, rk, eval, stats);
    auto out = evaluate_departure(*swarm_, initial_, eval, stats);
    out.time_tag = vp.t_new;
    return out;
  }

  if (history_.empty()) {
    history_.push_back(*vp.u_old);
    history_t_.push_back(vp.t_old);
  }
  history_.push_back(*vp.u_new);
  history_t_.push_back(vp.t_new);
  if (!infinite()) {
    while (static_cast<std::int64_t>(history_.size()) > lookback_ + 1) {
      history_.pop_front();
      history_t_.pop_front();
    }
  }

  const auto depth = static_cast<std::int64_t>(history_.size()) - 1;
  if (!infinite() && static_cast<std::int64_t>(fields_.size()) < depth)
    throw ConfigError("look-back buffer holds fewer fields than the requested depth");

  swarm_->reset_to_dofs();
  for (std::int64_t k = depth - 1; k >= 0; --k) {  // newest interval first
    VelocityPair pair{&history_[static_cast<std::size_t>(k)],
                      &history_[static_cast<std::size_t>(k) + 1],
                      history_t_[static_cast<std::size_t>(k)],
                      history_t_[static_cast<std::size_t>(k) + 1]};
    backtrack(*swarm_, pair, rk, eval, stats);
  }
  const auto& source =
      infinite() ? initial_ : fields_[fields_.size() - static_cast<std::size_t>(depth)];
  auto out = evaluate_departure(*swarm_, source, eval, stats);
  out.time_tag = vp.t_new;
  return out;
}

fem::ScalarField advect_once(const fem::FunctionSpace& space,
                             const partition::PartitionLayout& layout, const VelocityPair& vp,
                             const RKScheme& rk, const fem::ScalarField& c,
                             const fem::FieldEvaluator& eval, TransportStats& stats) {
  ParticleSwarm swarm(space, layout);
  backtrack(swarm, vp, rk, eval, stats);
  auto out = evaluate_departure(swarm, c, eval, stats);
  out.time_tag = vp.t_new;
  return out;
}

}  // namespace mmoc::transport
