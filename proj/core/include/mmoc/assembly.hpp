#pragma once

#include <functional>

#include "mmoc/field.hpp"
#include "mmoc/quadrature.hpp"
#include "mmoc/sparse.hpp"
#include "mmoc/space.hpp"

namespace mmoc::fem {

enum class OperatorKind { Mass, Stiffness };

/// Geometry of one micro-element at the quadrature points of a rule: physical
/// points, total weights (reference weight x |det J|/d!), and the inverse
/// transpose of the full Jacobian (blending composed with the affine map),
/// for pulling reference gradients to physical space.
struct ElementGeometry {
  static constexpr int kMaxQ = 14;
  int nq = 0;
  Vec3 x_comp[kMaxQ];
  Vec3 x_phys[kMaxQ];
  double weight[kMaxQ];
  double inv_jt[kMaxQ][9];  // row-major 3x3, identity-padded in 2D
};

/// Fills `geo` for global element `elem`; throws GeometryError on non-positive
/// Jacobian determinant at any quadrature point.
void element_geometry(const mesh::MeshHierarchy& h, std::int64_t elem, const QuadRule& rule,
                      ElementGeometry& geo);

/// Galerkin matrices on the blended physical domain, entries symmetrized.
/// Quadrature: degree 2 for P1 spaces, degree 4+ for P2.
SparseOperator assemble(const FunctionSpace& space, OperatorKind kind);

/// Load vector (f(., t), v_i) for all test functions.
std::vector<double> assemble_load(const FunctionSpace& space,
                                  const std::function<double(const Vec3&, double)>& f, double t);

/// L2 norm of (field - exact) by element quadrature of the given degree.
double l2_error(const ScalarField& field, const ScalarFunction& exact, int quad_degree = 6);

/// Integral of 1 over the physical domain via element quadrature.
double domain_measure(const mesh::MeshHierarchy& h, int quad_degree = 4);

}  // namespace mmoc::fem
