#include "mmoc/stokes.hpp"

#include <Eigen/Sparse>
#include <cmath>

#include "mmoc/diffusion.hpp"
#include "mmoc/error.hpp"
#include "mmoc/quadrature.hpp"

namespace mmoc::stokes {

struct StokesSystem::Cholesky {
  Eigen::SparseMatrix<double> matrix;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
};

StokesSystem::~StokesSystem() = default;

namespace {

Eigen::SparseMatrix<double> to_eigen(const fem::SparseOperator& op) {
  const auto n = op.size();
  Eigen::SparseMatrix<double> m(n, n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(op.nnz());
  for (std::int64_t r = 0; r < n; ++r)
    for (auto k = op.row_ptr()[static_cast<std::size_t>(r)];
         k < op.row_ptr()[static_cast<std::size_t>(r) + 1]; ++k)
      trips.emplace_back(static_cast<int>(r), static_cast<int>(op.cols()[static_cast<std::size_t>(k)]),
                         op.values()[static_cast<std::size_t>(k)]);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

}  // namespace

StokesSystem::StokesSystem(const mesh::MeshHierarchy& h, double viscosity, InnerSolver inner,
                           VelocityBC bc)
    : h_(&h), mu_(viscosity), inner_(inner), bc_(std::move(bc)) {
  vel_space_ = std::make_unique<fem::FunctionSpace>(h, 2);
  prs_space_ = std::make_unique<fem::FunctionSpace>(h, 1);
  const int d = h.dim();
  const auto nu = vel_space_->dof_count();
  const auto np = prs_space_->dof_count();

  // velocity constraints per component from the boundary tags
  constrained_.assign(static_cast<std::size_t>(d * nu), 0);
  constraint_values_.assign(static_cast<std::size_t>(d * nu), 0.0);
  for (std::int64_t i = 0; i < nu; ++i) {
    const auto flags = vel_space_->dof_bc(i);
    const bool pinned = flags & (mesh::bc_flags::noslip | mesh::bc_flags::dirichlet);
    Vec3 val{0, 0, 0};
    if (pinned && bc_.value) val = bc_.value(vel_space_->dof_coord(i));
    for (int c = 0; c < d; ++c) {
      const bool slip = flags & static_cast<std::uint8_t>(mesh::bc_flags::freeslip_x << c);
      if (pinned || slip) {
        constrained_[static_cast<std::size_t>(c * nu + i)] = 1;
        constraint_values_[static_cast<std::size_t>(c * nu + i)] = pinned ? val[c] : 0.0;
      }
    }
  }

  // assemble K (2 mu eps:eps) and B (-q div u) on shared quadrature geometry
  const fem::QuadRule& rule = fem::simplex_rule(d, 4);
  const int nq = static_cast<int>(rule.points.size());
  const int vpe = vel_space_->dofs_per_element();
  const int ppe = prs_space_->dofs_per_element();
  std::vector<double> pval(static_cast<std::size_t>(nq) * ppe);
  std::vector<Vec3> vgrad(static_cast<std::size_t>(nq) * vpe);
  for (int q = 0; q < nq; ++q) {
    prs_space_->shape(rule.points[static_cast<std::size_t>(q)].lambda.data(),
                      &pval[static_cast<std::size_t>(q) * ppe]);
    vel_space_->shape_grad(rule.points[static_cast<std::size_t>(q)].lambda.data(),
                           &vgrad[static_cast<std::size_t>(q) * vpe]);
  }

  std::vector<fem::Triplet> kt, bt;
  kt.reserve(static_cast<std::size_t>(vel_space_->element_count()) * vpe * vpe * d * d / 2);
  bt.reserve(static_cast<std::size_t>(vel_space_->element_count()) * vpe * ppe * d);
  const auto& lat = h.lattice(h.max_level());
  const auto lat_count = static_cast<std::int64_t>(lat.element_count());
  fem::ElementGeometry geo;
  std::int64_t vdofs[10], pdofs[4];
  Vec3 pg[10];
  for (std::int64_t elem = 0; elem < static_cast<std::int64_t>(vel_space_->element_count());
       ++elem) {
    const auto macro = static_cast<std::int32_t>(elem / lat_count);
    const auto le = static_cast<std::int32_t>(elem % lat_count);
    fem::element_geometry(h, elem, rule, geo);
    vel_space_->element_dofs(macro, le, vdofs);
    prs_space_->element_dofs(macro, le, pdofs);
    for (int q = 0; q < nq; ++q) {
      const double w = geo.weight[q];
      const double* jt = geo.inv_jt[q];
      for (int i = 0; i < vpe; ++i) {
        const Vec3& g = vgrad[static_cast<std::size_t>(q) * vpe + i];
        pg[i] = {jt[0] * g.x + jt[1] * g.y + jt[2] * g.z, jt[3] * g.x + jt[4] * g.y + jt[5] * g.z,
                 jt[6] * g.x + jt[7] * g.y + jt[8] * g.z};
      }
      // K[(b,i),(a,j)] += w mu (delta_ab grad_i . grad_j + dgrad_j[b] dgrad_i[a])
      for (int i = 0; i < vpe; ++i)
        for (int j = 0; j < vpe; ++j) {
          const double lap = dot(pg[i], pg[j]);
          for (int cb = 0; cb < d; ++cb)
            for (int ca = 0; ca < d; ++ca) {
              const double v = w * mu_ * ((ca == cb ? lap : 0.0) + pg[j][cb] * pg[i][ca]);
              if (v != 0.0)
                kt.push_back({cb * nu + vdofs[i], ca * nu + vdofs[j], v});
            }
        }
      // B[p,(a,j)] -= w psi_p dgrad_j[a]
      const double* pv = &pval[static_cast<std::size_t>(q) * ppe];
      for (int pi = 0; pi < ppe; ++pi)
        for (int j = 0; j < vpe; ++j)
          for (int ca = 0; ca < d; ++ca)
            bt.push_back({pdofs[pi], ca * nu + vdofs[j], -w * pv[pi] * pg[j][ca]});
    }
  }
  k_full_ = fem::SparseOperator::from_triplets(d * nu, kt);
  k_full_.symmetrize();
  k_elim_ = k_full_;
  k_elim_.eliminate(constrained_);
  // rectangular B stored with square row count np (rows are pressure DoFs)
  b_ = fem::SparseOperator::from_triplets(std::max(np, d * nu), bt);

  prs_mass_ = fem::assemble(*prs_space_, fem::OperatorKind::Mass);
  prs_lumped_.resize(static_cast<std::size_t>(np));
  for (std::int64_t i = 0; i < np; ++i) prs_lumped_[static_cast<std::size_t>(i)] = prs_mass_.row_sum(i);

  if (inner_ == InnerSolver::FactorizedCholesky) {
    chol_ = std::make_unique<Cholesky>();
    chol_->matrix = to_eigen(k_elim_);
    chol_->solver.compute(chol_->matrix);
    if (chol_->solver.info() != Eigen::Success)
      throw Error("Cholesky factorization of the viscous block failed");
  }
}

std::int64_t StokesSystem::velocity_dofs() const {
  return static_cast<std::int64_t>(h_->dim()) * vel_space_->dof_count();
}

std::vector<double> StokesSystem::assemble_force(const fem::ScalarField& c,
                                                 const BoussinesqForce& f) const {
  const int d = h_->dim();
  const auto nu = vel_space_->dof_count();
  const fem::QuadRule& rule = fem::simplex_rule(d, 4);
  const int nq = static_cast<int>(rule.points.size());
  const int vpe = vel_space_->dofs_per_element();
  const auto& cspace = *c.space;
  const int cpe = cspace.dofs_per_element();

  std::vector<double> vval(static_cast<std::size_t>(nq) * vpe);
  std::vector<double> cval(static_cast<std::size_t>(nq) * cpe);
  for (int q = 0; q < nq; ++q) {
    vel_space_->shape(rule.points[static_cast<std::size_t>(q)].lambda.data(),
                      &vval[static_cast<std::size_t>(q) * vpe]);
    cspace.shape(rule.points[static_cast<std::size_t>(q)].lambda.data(),
                 &cval[static_cast<std::size_t>(q) * cpe]);
  }

  std::vector<double> out(static_cast<std::size_t>(d) * static_cast<std::size_t>(nu), 0.0);
  const auto& lat = h_->lattice(h_->max_level());
  const auto lat_count = static_cast<std::int64_t>(lat.element_count());
  fem::ElementGeometry geo;
  std::int64_t vdofs[10], cdofs[10];
  for (std::int64_t elem = 0; elem < static_cast<std::int64_t>(vel_space_->element_count());
       ++elem) {
    const auto macro = static_cast<std::int32_t>(elem / lat_count);
    const auto le = static_cast<std::int32_t>(elem % lat_count);
    fem::element_geometry(*h_, elem, rule, geo);
    vel_space_->element_dofs(macro, le, vdofs);
    cspace.element_dofs(macro, le, cdofs);
    for (int q = 0; q < geo.nq; ++q) {
      double cq = 0.0;
      const double* cv = &cval[static_cast<std::size_t>(q) * cpe];
      for (int i = 0; i < cpe; ++i) cq += cv[i] * c[cdofs[i]];
      const Vec3 g = f.gravity ? f.gravity(geo.x_phys[q]) : Vec3{0, 1, 0};
      const double scale = geo.weight[q] * f.rayleigh * cq;
      const double* vv = &vval[static_cast<std::size_t>(q) * vpe];
      for (int i = 0; i < vpe; ++i)
        for (int ca = 0; ca < d; ++ca)
          out[static_cast<std::size_t>(ca * nu + vdofs[i])] += scale * g[ca] * vv[i];
    }
  }
  return out;
}

void StokesSystem::solve_k(std::vector<double>& x, const std::vector<double>& rhs,
                           std::int64_t* inner_its) const {
  if (inner_ == InnerSolver::FactorizedCholesky) {
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    Eigen::VectorXd sol = chol_->solver.solve(b);
    x.assign(sol.data(), sol.data() + sol.size());
    return;
  }
  auto info = diffusion::cg_solve(k_elim_, rhs, x, 1e-12,
                                  static_cast<std::int64_t>(rhs.size()) + 1000);
  if (inner_its) *inner_its += info.iterations;
}

void StokesSystem::apply_bt(std::span<const double> p, std::vector<double>& out) const {
  // out = B^T p  (B stored row-wise over pressure DoFs)
  std::fill(out.begin(), out.end(), 0.0);
  const auto np = prs_space_->dof_count();
  for (std::int64_t r = 0; r < np; ++r) {
    const double pr = p[static_cast<std::size_t>(r)];
    if (pr == 0.0) continue;
    for (auto k = b_.row_ptr()[static_cast<std::size_t>(r)];
         k < b_.row_ptr()[static_cast<std::size_t>(r) + 1]; ++k)
      out[static_cast<std::size_t>(b_.cols()[static_cast<std::size_t>(k)])] +=
          b_.values()[static_cast<std::size_t>(k)] * pr;
  }
}

StokesSystem::SolveInfo StokesSystem::solve(const std::vector<double>& force,
                                            fem::VectorField& u, fem::ScalarField& p) const {
  const int d = h_->dim();
  const auto nu = vel_space_->dof_count();
  const auto np = prs_space_->dof_count();
  const auto nvel = static_cast<std::size_t>(d * nu);
  SolveInfo info;

  // lift the constrained values
  std::vector<double> fp(nvel);
  {
    const auto kg = k_full_.multiply(constraint_values_);
    for (std::size_t i = 0; i < nvel; ++i)
      fp[i] = constrained_[i] ? 0.0 : force[i] - kg[i];
  }
  std::vector<double> dp(static_cast<std::size_t>(np), 0.0);
  {
    // d' = -B g
    std::vector<double> bg(static_cast<std::size_t>(b_.size()));
    b_.multiply(constraint_values_, bg);
    for (std::int64_t i = 0; i < np; ++i) dp[static_cast<std::size_t>(i)] = -bg[static_cast<std::size_t>(i)];
  }

  auto project_const = [&](std::vector<double>& v) {
    double mean = 0.0;
    for (std::int64_t i = 0; i < np; ++i) mean += v[static_cast<std::size_t>(i)];
    mean /= static_cast<double>(np);
    for (std::int64_t i = 0; i < np; ++i) v[static_cast<std::size_t>(i)] -= mean;
  };

  // u0 = K^-1 f'
  std::vector<double> u0(nvel, 0.0);
  for (int c = 0; c < d; ++c)
    for (std::int64_t i = 0; i < nu; ++i)
      u0[static_cast<std::size_t>(c * nu + i)] = u.component[static_cast<std::size_t>(c)][i];
  for (std::size_t i = 0; i < nvel; ++i)
    if (constrained_[i]) u0[i] = 0.0;
  solve_k(u0, fp, &info.inner_iterations);

  // Schur rhs: B u0 - d'
  std::vector<double> rhs_s(static_cast<std::size_t>(np));
  {
    std::vector<double> bu(static_cast<std::size_t>(b_.size()));
    b_.multiply(u0, bu);
    for (std::int64_t i = 0; i < np; ++i)
      rhs_s[static_cast<std::size_t>(i)] = bu[static_cast<std::size_t>(i)] - dp[static_cast<std::size_t>(i)];
  }
  project_const(rhs_s);

  // outer CG on S = B K^-1 B^T with lumped pressure mass preconditioner
  std::vector<double> pv(static_cast<std::size_t>(np));
  for (std::int64_t i = 0; i < np; ++i) pv[static_cast<std::size_t>(i)] = p[i];
  project_const(pv);

  std::vector<double> r(static_cast<std::size_t>(np)), z(static_cast<std::size_t>(np)),
      pk(static_cast<std::size_t>(np)), sk(static_cast<std::size_t>(np));
  std::vector<double> bt(nvel), ky(nvel, 0.0), by(static_cast<std::size_t>(b_.size()));

  auto apply_s = [&](const std::vector<double>& vec, std::vector<double>& out) {
    apply_bt(vec, bt);
    for (std::size_t i = 0; i < nvel; ++i)
      if (constrained_[i]) bt[i] = 0.0;
    std::fill(ky.begin(), ky.end(), 0.0);
    solve_k(ky, bt, &info.inner_iterations);
    b_.multiply(ky, by);
    for (std::int64_t i = 0; i < np; ++i) out[static_cast<std::size_t>(i)] = by[static_cast<std::size_t>(i)];
    project_const(out);
  };

  apply_s(pv, r);
  for (std::int64_t i = 0; i < np; ++i)
    r[static_cast<std::size_t>(i)] = rhs_s[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)];
  project_const(r);

  double rhs_norm = 0.0;
  for (const auto v : rhs_s) rhs_norm += v * v;
  rhs_norm = std::sqrt(rhs_norm);
  const double tol_abs = outer_tolerance * (rhs_norm > 0.0 ? rhs_norm : 1.0);

  double rz = 0.0;
  for (std::int64_t i = 0; i < np; ++i) {
    z[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)] / prs_lumped_[static_cast<std::size_t>(i)];
    rz += r[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
  }
  pk = z;
  double rn = 0.0;
  for (const auto v : r) rn += v * v;
  rn = std::sqrt(rn);
  info.history.push_back(rn);

  const int maxit = 2 * static_cast<int>(np) + 100;
  int it = 0;
  while (rn > tol_abs && it < maxit) {
    ++it;
    apply_s(pk, sk);
    double psk = 0.0;
    for (std::int64_t i = 0; i < np; ++i) psk += pk[static_cast<std::size_t>(i)] * sk[static_cast<std::size_t>(i)];
    const double alpha = rz / psk;
    for (std::int64_t i = 0; i < np; ++i) {
      pv[static_cast<std::size_t>(i)] += alpha * pk[static_cast<std::size_t>(i)];
      r[static_cast<std::size_t>(i)] -= alpha * sk[static_cast<std::size_t>(i)];
    }
    project_const(r);
    rn = 0.0;
    for (const auto v : r) rn += v * v;
    rn = std::sqrt(rn);
    info.history.push_back(rn);
    if (rn <= tol_abs) break;
    double rz_new = 0.0;
    for (std::int64_t i = 0; i < np; ++i) {
      z[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)] / prs_lumped_[static_cast<std::size_t>(i)];
      rz_new += r[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::int64_t i = 0; i < np; ++i)
      pk[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] + beta * pk[static_cast<std::size_t>(i)];
  }
  info.outer_iterations = it;
  if (rn > tol_abs)
    throw SolverError("Stokes Schur-complement iteration stagnated", info.history);

  // velocity update: K u_f = f' - B^T p, then add the constrained lift
  apply_bt(pv, bt);
  std::vector<double> rhs_u(nvel);
  for (std::size_t i = 0; i < nvel; ++i) rhs_u[i] = constrained_[i] ? 0.0 : fp[i] - bt[i];
  solve_k(u0, rhs_u, &info.inner_iterations);
  for (std::size_t i = 0; i < nvel; ++i)
    if (constrained_[i]) u0[i] = constraint_values_[i];

  // pressure normalization to zero mass-weighted mean
  {
    const auto mp = prs_mass_.multiply(pv);
    double num = 0.0, den = 0.0;
    for (std::int64_t i = 0; i < np; ++i) {
      num += mp[static_cast<std::size_t>(i)];
      den += prs_lumped_[static_cast<std::size_t>(i)];
    }
    const double shift = num / den;
    for (std::int64_t i = 0; i < np; ++i) pv[static_cast<std::size_t>(i)] -= shift;
  }

  for (int c = 0; c < d; ++c)
    for (std::int64_t i = 0; i < nu; ++i)
      u.component[static_cast<std::size_t>(c)][i] = u0[static_cast<std::size_t>(c * nu + i)];
  for (std::int64_t i = 0; i < np; ++i) p[i] = pv[static_cast<std::size_t>(i)];

  // divergence residual check
  {
    std::vector<double> bu(static_cast<std::size_t>(b_.size()));
    b_.multiply(u0, bu);
    double div = 0.0;
    for (std::int64_t i = 0; i < np; ++i) div += bu[static_cast<std::size_t>(i)] * bu[static_cast<std::size_t>(i)];
    double un = 0.0;
    for (const auto v : u0) un += v * v;
    info.div_residual = std::sqrt(div);
    info.rel_div_residual = info.div_residual / (std::sqrt(un) > 0.0 ? std::sqrt(un) : 1.0);
  }
  return info;
}

}  // namespace mmoc::stokes
