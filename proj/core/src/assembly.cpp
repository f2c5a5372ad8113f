#include "mmoc/assembly.hpp"

#include <cmath>

#include "mmoc/error.hpp"

namespace mmoc::fem {

namespace {

// det and inverse-transpose of a row-major 3x3 (2D maps keep the z row/col identity)
double invert_transpose(const double* j, int dim, double* out) {
  if (dim == 2) {
    const double det = j[0] * j[4] - j[1] * j[3];
    const double inv = 1.0 / det;
    out[0] = j[4] * inv;
    out[1] = -j[3] * inv;
    out[3] = -j[1] * inv;
    out[4] = j[0] * inv;
    out[2] = out[5] = out[6] = out[7] = 0.0;
    out[8] = 1.0;
    return det;
  }
  const double c00 = j[4] * j[8] - j[5] * j[7];
  const double c01 = j[5] * j[6] - j[3] * j[8];
  const double c02 = j[3] * j[7] - j[4] * j[6];
  const double det = j[0] * c00 + j[1] * c01 + j[2] * c02;
  const double inv = 1.0 / det;
  // inverse transpose = cofactor matrix / det
  out[0] = c00 * inv;
  out[1] = c01 * inv;
  out[2] = c02 * inv;
  out[3] = (j[2] * j[7] - j[1] * j[8]) * inv;
  out[4] = (j[0] * j[8] - j[2] * j[6]) * inv;
  out[5] = (j[1] * j[6] - j[0] * j[7]) * inv;
  out[6] = (j[1] * j[5] - j[2] * j[4]) * inv;
  out[7] = (j[2] * j[3] - j[0] * j[5]) * inv;
  out[8] = (j[0] * j[4] - j[1] * j[3]) * inv;
  return det;
}

void matmul3(const double* a, const double* b, double* out) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      out[3 * r + c] = a[3 * r] * b[c] + a[3 * r + 1] * b[3 + c] + a[3 * r + 2] * b[6 + c];
}

constexpr double kFactorial[4] = {1.0, 1.0, 2.0, 6.0};

}  // namespace

void element_geometry(const mesh::MeshHierarchy& h, std::int64_t elem, const QuadRule& rule,
                      ElementGeometry& geo) {
  const int dim = h.dim();
  const auto& level = h.finest();
  const auto& e = level.elements[static_cast<std::size_t>(elem)];
  Vec3 corner[4];
  for (int c = 0; c <= dim; ++c) corner[c] = level.vertices_comp[static_cast<std::size_t>(e[c])];

  // affine part: columns are edge vectors of the computational micro-element
  double jaff[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  for (int c = 0; c < dim; ++c) {
    const Vec3 edge = corner[c + 1] - corner[0];
    jaff[c] = edge.x;
    jaff[3 + c] = edge.y;
    jaff[6 + c] = edge.z;
  }

  const bool blended = h.blending().kind() != mesh::BlendingMap::Kind::Identity;
  geo.nq = static_cast<int>(rule.points.size());
  for (int q = 0; q < geo.nq; ++q) {
    const auto& pt = rule.points[static_cast<std::size_t>(q)];
    Vec3 xc{0, 0, 0};
    for (int c = 0; c <= dim; ++c) xc += pt.lambda[static_cast<std::size_t>(c)] * corner[c];
    geo.x_comp[q] = xc;
    double jtotal[9];
    if (blended) {
      const auto jb = h.blending().jacobian(xc);
      matmul3(jb.data(), jaff, jtotal);
      geo.x_phys[q] = h.blending().forward(xc);
    } else {
      for (int k = 0; k < 9; ++k) jtotal[k] = jaff[k];
      geo.x_phys[q] = xc;
    }
    const double det = invert_transpose(jtotal, dim, geo.inv_jt[q]);
    if (!(det > 0.0))
      throw GeometryError("non-positive Jacobian determinant at quadrature point",
                          static_cast<long long>(elem));
    geo.weight[q] = pt.weight * det / kFactorial[dim];
  }
}

SparseOperator assemble(const FunctionSpace& space, OperatorKind kind) {
  const auto& h = space.hierarchy();
  const int dim = h.dim();
  const int dpe = space.dofs_per_element();
  const QuadRule& rule = simplex_rule(dim, space.degree() == 1 ? 2 : 4);
  const int nq = static_cast<int>(rule.points.size());

  // shape data at the rule points
  std::vector<double> values(static_cast<std::size_t>(nq) * dpe);
  std::vector<Vec3> ref_grads(static_cast<std::size_t>(nq) * dpe);
  for (int q = 0; q < nq; ++q) {
    space.shape(rule.points[static_cast<std::size_t>(q)].lambda.data(),
                &values[static_cast<std::size_t>(q) * dpe]);
    space.shape_grad(rule.points[static_cast<std::size_t>(q)].lambda.data(),
                     &ref_grads[static_cast<std::size_t>(q) * dpe]);
  }

  std::vector<Triplet> triplets;
  triplets.reserve(space.element_count() * static_cast<std::size_t>(dpe) * dpe);
  const auto& lat = h.lattice(h.max_level());
  const auto lat_count = static_cast<std::int64_t>(lat.element_count());

  ElementGeometry geo;
  std::int64_t dofs[10];
  double local[10][10];
  Vec3 phys_grad[10];
  for (std::int64_t elem = 0; elem < static_cast<std::int64_t>(space.element_count()); ++elem) {
    const auto macro = static_cast<std::int32_t>(elem / lat_count);
    const auto le = static_cast<std::int32_t>(elem % lat_count);
    element_geometry(h, elem, rule, geo);
    space.element_dofs(macro, le, dofs);
    for (int i = 0; i < dpe; ++i)
      for (int j = 0; j < dpe; ++j) local[i][j] = 0.0;

    for (int q = 0; q < nq; ++q) {
      const double w = geo.weight[q];
      if (kind == OperatorKind::Mass) {
        const double* v = &values[static_cast<std::size_t>(q) * dpe];
        for (int i = 0; i < dpe; ++i)
          for (int j = 0; j < dpe; ++j) local[i][j] += w * v[i] * v[j];
      } else {
        const double* jt = geo.inv_jt[q];
        for (int i = 0; i < dpe; ++i) {
          const Vec3& g = ref_grads[static_cast<std::size_t>(q) * dpe + i];
          phys_grad[i] = {jt[0] * g.x + jt[1] * g.y + jt[2] * g.z,
                          jt[3] * g.x + jt[4] * g.y + jt[5] * g.z,
                          jt[6] * g.x + jt[7] * g.y + jt[8] * g.z};
        }
        for (int i = 0; i < dpe; ++i)
          for (int j = 0; j < dpe; ++j) local[i][j] += w * dot(phys_grad[i], phys_grad[j]);
      }
    }
    for (int i = 0; i < dpe; ++i)
      for (int j = 0; j < dpe; ++j) triplets.push_back({dofs[i], dofs[j], local[i][j]});
  }

  auto op = SparseOperator::from_triplets(space.dof_count(), triplets);
  op.symmetrize();
  return op;
}

std::vector<double> assemble_load(const FunctionSpace& space,
                                  const std::function<double(const Vec3&, double)>& f, double t) {
  const auto& h = space.hierarchy();
  const int dpe = space.dofs_per_element();
  const QuadRule& rule = simplex_rule(h.dim(), space.degree() == 1 ? 2 : 4);
  const int nq = static_cast<int>(rule.points.size());
  std::vector<double> values(static_cast<std::size_t>(nq) * dpe);
  for (int q = 0; q < nq; ++q)
    space.shape(rule.points[static_cast<std::size_t>(q)].lambda.data(),
                &values[static_cast<std::size_t>(q) * dpe]);

  std::vector<double> load(static_cast<std::size_t>(space.dof_count()), 0.0);
  const auto& lat = h.lattice(h.max_level());
  const auto lat_count = static_cast<std::int64_t>(lat.element_count());
  ElementGeometry geo;
  std::int64_t dofs[10];
  for (std::int64_t elem = 0; elem < static_cast<std::int64_t>(space.element_count()); ++elem) {
    element_geometry(h, elem, rule, geo);
    space.element_dofs(static_cast<std::int32_t>(elem / lat_count),
                       static_cast<std::int32_t>(elem % lat_count), dofs);
    for (int q = 0; q < geo.nq; ++q) {
      const double wf = geo.weight[q] * f(geo.x_phys[q], t);
      const double* v = &values[static_cast<std::size_t>(q) * dpe];
      for (int i = 0; i < dpe; ++i) load[static_cast<std::size_t>(dofs[i])] += wf * v[i];
    }
  }
  return load;
}

double l2_error(const ScalarField& field, const ScalarFunction& exact, int quad_degree) {
  const auto& space = *field.space;
  const auto& h = space.hierarchy();
  const int dpe = space.dofs_per_element();
  const QuadRule& rule = simplex_rule(h.dim(), quad_degree);
  const int nq = static_cast<int>(rule.points.size());
  std::vector<double> values(static_cast<std::size_t>(nq) * dpe);
  for (int q = 0; q < nq; ++q)
    space.shape(rule.points[static_cast<std::size_t>(q)].lambda.data(),
                &values[static_cast<std::size_t>(q) * dpe]);

  const auto& lat = h.lattice(h.max_level());
  const auto lat_count = static_cast<std::int64_t>(lat.element_count());
  ElementGeometry geo;
  std::int64_t dofs[10];
  double acc = 0.0;
  for (std::int64_t elem = 0; elem < static_cast<std::int64_t>(space.element_count()); ++elem) {
    element_geometry(h, elem, rule, geo);
    space.element_dofs(static_cast<std::int32_t>(elem / lat_count),
                       static_cast<std::int32_t>(elem % lat_count), dofs);
    for (int q = 0; q < geo.nq; ++q) {
      const double* v = &values[static_cast<std::size_t>(q) * dpe];
      double uh = 0.0;
      for (int i = 0; i < dpe; ++i) uh += v[i] * field[dofs[i]];
      const double diff = uh - exact(geo.x_phys[q]);
      acc += geo.weight[q] * diff * diff;
    }
  }
  return std::sqrt(acc);
}

double domain_measure(const mesh::MeshHierarchy& h, int quad_degree) {
  const QuadRule& rule = simplex_rule(h.dim(), quad_degree);
  ElementGeometry geo;
  double acc = 0.0;
  for (std::int64_t elem = 0; elem < static_cast<std::int64_t>(h.finest().element_count()); ++elem) {
    element_geometry(h, elem, rule, geo);
    for (int q = 0; q < geo.nq; ++q) acc += geo.weight[q];
  }
  return acc;
}

}  // namespace mmoc::fem
