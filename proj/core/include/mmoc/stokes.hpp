#pragma once

#include <functional>
#include <memory>

#include "mmoc/assembly.hpp"
#include "mmoc/field.hpp"
#include "mmoc/sparse.hpp"

namespace mmoc::stokes {

/// Buoyancy term F(c) = Ra * c * g with |g| = 1.
struct BoussinesqForce {
  double rayleigh = 0.0;
  std::function<Vec3(const Vec3&)> gravity;
};

/// Dirichlet velocity data on NoSlip/Dirichlet-tagged boundaries (zero if
/// empty). Free-slip constrains the normal component only and is supported on
/// axis-aligned facets.
struct VelocityBC {
  std::function<Vec3(const Vec3&)> value;
};

enum class InnerSolver { ConjugateGradient, FactorizedCholesky };

/// Taylor-Hood (P2-P1) discretization of the incompressible Stokes system
/// with constant viscosity. Solved by a pressure Schur-complement CG (Uzawa
/// type): outer CG on S = B K^-1 B^T preconditioned by the lumped pressure
/// mass matrix, inner solves on the viscous block K either by Jacobi-CG or by
/// a cached sparse Cholesky factorization (K is time-invariant).
class StokesSystem {
 public:
  StokesSystem(const mesh::MeshHierarchy& h, double viscosity = 1.0,
               InnerSolver inner = InnerSolver::ConjugateGradient, VelocityBC bc = {});
  ~StokesSystem();

  const fem::FunctionSpace& velocity_space() const { return *vel_space_; }
  const fem::FunctionSpace& pressure_space() const { return *prs_space_; }
  double viscosity() const { return mu_; }

  std::int64_t velocity_dofs() const;  // stacked over components

  /// Load vector (Ra c g, v) on the stacked velocity DoFs (component-major).
  std::vector<double> assemble_force(const fem::ScalarField& c, const BoussinesqForce& f) const;

  struct SolveInfo {
    int outer_iterations = 0;
    std::int64_t inner_iterations = 0;
    double div_residual = 0.0;       // ||B u||_2
    double rel_div_residual = 0.0;   // ||B u||_2 / ||u||_2
    std::vector<double> history;
  };

  /// Solve the saddle-point system for the given force; u and p are used as
  /// warm starts and overwritten. Pressure is normalized to zero mean.
  SolveInfo solve(const std::vector<double>& force, fem::VectorField& u,
                  fem::ScalarField& p) const;

  const fem::SparseOperator& viscous_block() const { return k_elim_; }
  const fem::SparseOperator& divergence() const { return b_; }
  const std::vector<std::uint8_t>& velocity_constraints() const { return constrained_; }

  double outer_tolerance = 1e-9;
  double div_tolerance = 1e-8;  // enforced on ||B u|| / ||u||

 private:
  const mesh::MeshHierarchy* h_;
  double mu_;
  InnerSolver inner_;
  VelocityBC bc_;
  std::unique_ptr<fem::FunctionSpace> vel_space_;
  std::unique_ptr<fem::FunctionSpace> prs_space_;
  fem::SparseOperator k_full_;  // viscous block before elimination
  fem::SparseOperator k_elim_;
  fem::SparseOperator b_;            // divergence: pressure rows x velocity cols
  fem::SparseOperator prs_mass_;
  std::vector<double> prs_lumped_;   // lumped pressure mass
  std::vector<std::uint8_t> constrained_;  // stacked velocity mask
  std::vector<double> constraint_values_;

  struct Cholesky;
  std::unique_ptr<Cholesky> chol_;

  void solve_k(std::vector<double>& x, const std::vector<double>& rhs,
               std::int64_t* inner_its) const;
  void apply_bt(std::span<const double> p, std::vector<double>& out) const;
};

}  // namespace mmoc::stokes
