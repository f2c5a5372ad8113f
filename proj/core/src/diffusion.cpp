#include "mmoc/diffusion.hpp"

#include <cmath>

#include "mmoc/error.hpp"

namespace mmoc::diffusion {

CGInfo cg_solve(const fem::SparseOperator& E, std::span<const double> rhs, std::vector<double>& x,
                double tol, std::int64_t maxit) {
  const auto n = static_cast<std::size_t>(E.size());
  if (x.size() != n) x.assign(n, 0.0);
  const auto diag = E.diagonal();
  std::vector<double> inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) inv_diag[i] = diag[i] != 0.0 ? 1.0 / diag[i] : 1.0;

  std::vector<double> r(n), z(n), p(n), q(n);
  E.multiply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];

  double rhs_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) rhs_norm += rhs[i] * rhs[i];
  rhs_norm = std::sqrt(rhs_norm);
  if (rhs_norm == 0.0) rhs_norm = 1.0;

  CGInfo info;
  auto res_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += r[i] * r[i];
    return std::sqrt(s);
  };
  double rn = res_norm();
  info.history.push_back(rn / rhs_norm);
  if (rn / rhs_norm <= tol) {
    info.relative_residual = rn / rhs_norm;
    return info;
  }

  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];

  for (std::int64_t it = 1; it <= maxit; ++it) {
    E.multiply(p, q);
    double pq = 0.0;
    for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    rn = res_norm();
    info.iterations = static_cast<int>(it);
    info.history.push_back(rn / rhs_norm);
    if (rn / rhs_norm <= tol) {
      info.relative_residual = rn / rhs_norm;
      return info;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    double rz_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) rz_new += r[i] * z[i];
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  info.relative_residual = rn / rhs_norm;
  throw SolverError("conjugate gradients failed to converge within " + std::to_string(maxit) +
                        " iterations (residual " + std::to_string(info.relative_residual) + ")",
                    info.history);
}

ThetaSystem::ThetaSystem(const fem::FunctionSpace& space, double kappa, double theta)
    : space_(&space), kappa_(kappa), theta_(theta) {
  if (kappa < 0.0) throw ConfigError("diffusivity must be non-negative");
  if (theta < 0.0 || theta > 1.0) throw ConfigError("theta must lie in [0, 1]");
  mass_ = fem::assemble(space, fem::OperatorKind::Mass);
  stiffness_ = fem::assemble(space, fem::OperatorKind::Stiffness);
}

void ThetaSystem::set_tau(double tau) {
  if (!(tau > 0.0)) throw ConfigError("time step must be positive");
  if (tau == tau_) return;
  tau_ = tau;
  system_full_.set_combination(1.0, mass_, tau * theta_ * kappa_, stiffness_);
  system_ = system_full_;
  system_.eliminate(space_->dirichlet_mask());
}

fem::ScalarField diffusion_step(const fem::ScalarField& c_hat, ThetaSystem& sys,
                                const SourceTerm& src, const DirichletBC& bc, double t_next,
                                CGInfo* info) {
  const auto& space = sys.space();
  const auto n = static_cast<std::size_t>(space.dof_count());
  const double tau = sys.tau();
  const double theta = sys.theta();
  const double t_prev = t_next - tau;

  // pure advection limit: identity apart from refreshed Dirichlet values
  if (sys.kappa() == 0.0 && src.is_zero()) {
    fem::ScalarField out = c_hat;
    out.time_tag = t_next;
    if (bc) {
      const auto& mask = space.dirichlet_mask();
      for (std::size_t i = 0; i < n; ++i)
        if (mask[i]) out.coeffs[i] = bc(space.dof_coord(static_cast<std::int64_t>(i)), t_next);
    }
    return out;
  }

  // rhs = (M - tau (1-theta) kappa A) c_hat + tau (theta q^{n+1} + (1-theta) q^n)
  fem::SparseOperator rhs_op;
  rhs_op.set_combination(1.0, sys.mass(), -tau * (1.0 - theta) * sys.kappa(), sys.stiffness());
  std::vector<double> rhs = rhs_op.multiply(c_hat.coeffs);
  if (!src.is_zero()) {
    const auto q_new = fem::assemble_load(space, src.q, t_next);
    if (theta < 1.0) {
      const auto q_old = fem::assemble_load(space, src.q, t_prev);
      for (std::size_t i = 0; i < n; ++i)
        rhs[i] += tau * (theta * q_new[i] + (1.0 - theta) * q_old[i]);
    } else {
      for (std::size_t i = 0; i < n; ++i) rhs[i] += tau * q_new[i];
    }
  }

  // Dirichlet lifting against the unconstrained system
  const auto& mask = space.dirichlet_mask();
  std::vector<double> g(n, 0.0);
  bool any_bc = false;
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) {
      g[i] = bc ? bc(space.dof_coord(static_cast<std::int64_t>(i)), t_next) : 0.0;
      any_bc = true;
    }
  if (any_bc) {
    const auto lift = sys.system_full().multiply(g);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = mask[i] ? g[i] : rhs[i] - lift[i];
  }

  fem::ScalarField out = c_hat;  // warm start
  out.time_tag = t_next;
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) out.coeffs[i] = g[i];
  const auto maxit = static_cast<std::int64_t>(10.0 * std::sqrt(static_cast<double>(n))) + 20;
  auto cg = cg_solve(sys.system(), rhs, out.coeffs, sys.solver_tolerance, maxit);
  if (info) *info = std::move(cg);
  return out;
}

}  // namespace mmoc::diffusion
