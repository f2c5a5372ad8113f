#include "mmoc/scheme.hpp"

#include <cmath>

#include "mmoc/error.hpp"

namespace mmoc::scheme {

double max_velocity(const fem::VectorField& u) {
  const int d = u.dim();
  const auto n = u.space->dof_count();
  double best = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
      const double v = u.component[static_cast<std::size_t>(c)][i];
      s += v * v;
    }
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

double cfl_dt(const fem::VectorField& u, const StepControl& ctrl) {
  if (ctrl.tau_fixed > 0.0) return ctrl.tau_fixed;
  const double umax = max_velocity(u);
  if (umax == 0.0) return ctrl.tau_fallback;
  return ctrl.cfl_max * ctrl.h_min / umax;
}

fem::ScalarField ad_step(const fem::ScalarField& c, const transport::VelocityPair& vp,
                         AdContext& ctx) {
  auto c_hat = ctx.buffer->advance(vp, ctx.rk, *ctx.eval, ctx.stats);
  ++ctx.counters.advection_sweeps;
  fem::ScalarField out;
  if (ctx.theta) {
    ctx.theta->set_tau(vp.t_new - vp.t_old);
    out = diffusion::diffusion_step(c_hat, *ctx.theta, ctx.source, ctx.bc, vp.t_new, &ctx.last_cg);
    ++ctx.counters.diffusion_solves;
  } else {
    out = std::move(c_hat);
  }
  ctx.buffer->store_field(out);
  (void)c;
  return out;
}

fem::ScalarField ads_step(const fem::ScalarField& c, const transport::VelocityPair& vp,
                          AdContext& ctx, transport::ParticleSwarm& swarm) {
  ++ctx.counters.ads_calls;
  const double tau = vp.t_new - vp.t_old;
  if (!(tau > 0.0)) throw ConfigError("ads_step: empty time interval");

  fem::ScalarField stage = c;
  if (ctx.theta) {
    ctx.theta->set_tau(0.5 * tau);
    stage = diffusion::diffusion_step(stage, *ctx.theta, ctx.source, ctx.bc,
                                      vp.t_old + 0.5 * tau, &ctx.last_cg);
    ++ctx.counters.diffusion_solves;
  }

  swarm.reset_to_dofs();
  transport::backtrack(swarm, vp, ctx.rk, *ctx.eval, ctx.stats);
  stage = transport::evaluate_departure(swarm, stage, *ctx.eval, ctx.stats);
  ++ctx.counters.advection_sweeps;

  if (ctx.theta) {
    ctx.theta->set_tau(0.5 * tau);
    stage = diffusion::diffusion_step(stage, *ctx.theta, ctx.source, ctx.bc, vp.t_new,
                                      &ctx.last_cg);
    ++ctx.counters.diffusion_solves;
  }
  stage.time_tag = vp.t_new;
  return stage;
}

CoupledState pc_step(const CoupledState& state, PcContext& ctx) {
  const double tau = cfl_dt(state.u, ctx.ctrl);
  const double t0 = state.t, t1 = state.t + tau;

  // predictor: temperature with the time-invariant velocity u^n
  transport::VelocityPair frozen{&state.u, &state.u, t0, t1};
  auto c_pred = ads_step(state.c, frozen, ctx.ad, *ctx.swarm);

  // predictor velocity from F(c_pred)
  CoupledState next;
  next.u = state.u;
  next.p = state.p;
  {
    const auto rhs = ctx.stokes->assemble_force(c_pred, ctx.force);
    ctx.last_stokes = ctx.stokes->solve(rhs, next.u, next.p);
    ++ctx.ad.counters.stokes_solves;
  }

  // corrector: restart from c^n with velocity interpolated u^n -> u_pred
  transport::VelocityPair lerp{&state.u, &next.u, t0, t1};
  next.c = ads_step(state.c, lerp, ctx.ad, *ctx.swarm);

  // corrected velocity from F(c^{n+1})
  {
    const auto rhs = ctx.stokes->assemble_force(next.c, ctx.force);
    ctx.last_stokes = ctx.stokes->solve(rhs, next.u, next.p);
    ++ctx.ad.counters.stokes_solves;
  }

  next.t = t1;
  next.n = state.n + 1;
  return next;
}

}  // namespace mmoc::scheme
