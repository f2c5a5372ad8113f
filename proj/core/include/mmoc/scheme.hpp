#pragma once

#include "mmoc/diffusion.hpp"
#include "mmoc/stokes.hpp"
#include "mmoc/transport.hpp"

namespace mmoc::scheme {

/// Time-step policy: fixed tau or CFL-driven
///   tau_n = cfl_max * h_min / max_x |u_h(x, t_n)|
/// with the max taken over velocity DoF values.
struct StepControl {
  double cfl_max = 1.0;
  double h_min = 0.0;
  double tau_fixed = 0.0;     // > 0 selects the fixed-step policy
  double tau_fallback = 0.0;  // returned when the velocity vanishes
};

/// Max Euclidean norm over the velocity DoFs (deterministic reduction order).
double max_velocity(const fem::VectorField& u);

double cfl_dt(const fem::VectorField& u, const StepControl& ctrl);

struct StepCounters {
  std::int64_t stokes_solves = 0;
  std::int64_t ads_calls = 0;
  std::int64_t diffusion_solves = 0;
  std::int64_t advection_sweeps = 0;
};

/// Shared pieces of the advection-diffusion stepping.
struct AdContext {
  const fem::FunctionSpace* space = nullptr;
  const partition::PartitionLayout* layout = nullptr;
  const fem::FieldEvaluator* eval = nullptr;
  transport::RKScheme rk = transport::RKScheme::rk4();
  transport::LookBackBuffer* buffer = nullptr;  // look-back state (AD scheme)
  diffusion::ThetaSystem* theta = nullptr;      // null: pure advection
  diffusion::SourceTerm source;
  diffusion::DirichletBC bc;
  transport::TransportStats stats;
  StepCounters counters;
  diffusion::CGInfo last_cg;
};

/// Advection-diffusion step: look-back advection to vp.t_new, then one
/// theta-method diffusion solve. Stores the accepted field back into the
/// look-back buffer.
fem::ScalarField ad_step(const fem::ScalarField& c, const transport::VelocityPair& vp,
                         AdContext& ctx);

/// Strang-split step: half diffusion, single-interval advection over the full
/// step, half diffusion (look-back 1 by construction).
fem::ScalarField ads_step(const fem::ScalarField& c, const transport::VelocityPair& vp,
                          AdContext& ctx, transport::ParticleSwarm& swarm);

struct CoupledState {
  fem::ScalarField c;
  fem::VectorField u;
  fem::ScalarField p;
  double t = 0.0;
  std::int64_t n = 0;
};

struct PcContext {
  AdContext ad;
  transport::ParticleSwarm* swarm = nullptr;
  stokes::StokesSystem* stokes = nullptr;
  stokes::BoussinesqForce force;
  StepControl ctrl;
  stokes::StokesSystem::SolveInfo last_stokes;
};

/// Predictor-corrector step: ADS with frozen u^n, Stokes solve on the
/// predicted temperature, ADS again from c^n with the velocity interpolated
/// between u^n and the prediction, final Stokes solve. Exactly two Stokes
/// solves and two ADS sweeps per call.
CoupledState pc_step(const CoupledState& state, PcContext& ctx);

}  // namespace mmoc::scheme
