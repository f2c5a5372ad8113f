#pragma once

#include <functional>
#include <optional>

#include "mmoc/assembly.hpp"
#include "mmoc/field.hpp"
#include "mmoc/sparse.hpp"

namespace mmoc::diffusion {

/// Internal heat production q(x, t); empty means zero.
struct SourceTerm {
  std::function<double(const Vec3&, double)> q;
  bool is_zero() const { return !q; }
};

/// Dirichlet boundary data for the scalar field.
using DirichletBC = std::function<double(const Vec3&, double)>;

struct CGInfo {
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> history;
};

/// Preconditioned (Jacobi) conjugate gradients for SPD systems.
/// Throws SolverError with the residual history if maxit is exceeded.
CGInfo cg_solve(const fem::SparseOperator& E, std::span<const double> rhs, std::vector<double>& x,
                double tol, std::int64_t maxit);

/// Theta-method operators for the diffusive step: E = M + tau*theta*kappa*A,
/// kept symmetric positive definite with Dirichlet rows/columns eliminated.
class ThetaSystem {
 public:
  ThetaSystem(const fem::FunctionSpace& space, double kappa, double theta);

  const fem::FunctionSpace& space() const { return *space_; }
  double kappa() const { return kappa_; }
  double theta() const { return theta_; }
  double tau() const { return tau_; }

  const fem::SparseOperator& mass() const { return mass_; }
  const fem::SparseOperator& stiffness() const { return stiffness_; }
  /// E with Dirichlet elimination applied (valid after set_tau).
  const fem::SparseOperator& system() const { return system_; }
  /// E before elimination, used for right-hand-side lifting.
  const fem::SparseOperator& system_full() const { return system_full_; }

  void set_tau(double tau);

  double solver_tolerance = 1e-10;

 private:
  const fem::FunctionSpace* space_;
  double kappa_;
  double theta_;
  double tau_ = -1.0;
  fem::SparseOperator mass_;
  fem::SparseOperator stiffness_;
  fem::SparseOperator system_full_;
  fem::SparseOperator system_;
};

/// One theta-method step: solve
///   E c^{n+1} = (M - tau (1-theta) kappa A) c_hat + tau (theta q^{n+1} + (1-theta) q^n)
/// with Dirichlet rows constrained to bc(., t_next). For kappa == 0 with no
/// source the system degenerates to the identity and no solve is performed.
fem::ScalarField diffusion_step(const fem::ScalarField& c_hat, ThetaSystem& sys,
                                const SourceTerm& src, const DirichletBC& bc, double t_next,
                                CGInfo* info = nullptr);

}  // namespace mmoc::diffusion
