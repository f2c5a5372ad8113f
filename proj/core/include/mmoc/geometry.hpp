#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mmoc {

/// Cartesian point/vector. 2D meshes keep z == 0.
struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
inline Vec3 operator*(double s, Vec3 a) { return a *= s; }
inline Vec3 operator*(Vec3 a, double s) { return a *= s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double dist(const Vec3& a, const Vec3& b) { return norm(a - b); }

/// Signed measure of a simplex: triangle area (2D, +z orientation) or tet volume.
inline double simplex_measure(const Vec3* v, int dim) {
  if (dim == 2) {
    const Vec3 e1 = v[1] - v[0], e2 = v[2] - v[0];
    return 0.5 * (e1.x * e2.y - e1.y * e2.x);
  }
  const Vec3 e1 = v[1] - v[0], e2 = v[2] - v[0], e3 = v[3] - v[0];
  return dot(e1, cross(e2, e3)) / 6.0;
}

/// Barycentric coordinates of p w.r.t. a simplex (dim+1 values, sum to 1).
/// Valid for non-degenerate simplices; 2D ignores z.
inline std::array<double, 4> barycentric(const Vec3* v, int dim, const Vec3& p) {
  std::array<double, 4> lam{0.0, 0.0, 0.0, 0.0};
  if (dim == 2) {
    const double ax = v[1].x - v[0].x, ay = v[1].y - v[0].y;
    const double bx = v[2].x - v[0].x, by = v[2].y - v[0].y;
    const double det = ax * by - ay * bx;
    const double px = p.x - v[0].x, py = p.y - v[0].y;
    lam[1] = (px * by - py * bx) / det;
    lam[2] = (ax * py - ay * px) / det;
    lam[0] = 1.0 - lam[1] - lam[2];
  } else {
    const Vec3 e1 = v[1] - v[0], e2 = v[2] - v[0], e3 = v[3] - v[0];
    const Vec3 r = p - v[0];
    const double det = dot(e1, cross(e2, e3));
    lam[1] = dot(r, cross(e2, e3)) / det;
    lam[2] = dot(e1, cross(r, e3)) / det;
    lam[3] = dot(e1, cross(e2, r)) / det;
    lam[0] = 1.0 - lam[1] - lam[2] - lam[3];
  }
  return lam;
}

/// Closest point on a segment [a,b] to p.
inline Vec3 closest_point_segment(const Vec3& a, const Vec3& b, const Vec3& p) {
  const Vec3 ab = b - a;
  const double denom = dot(ab, ab);
  double t = denom > 0.0 ? dot(p - a, ab) / denom : 0.0;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return a + t * ab;
}

/// Closest point on a triangle (a,b,c) to p (Ericson's region test).
inline Vec3 closest_point_triangle(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + (vb * denom) * ab + (vc * denom) * ac;
}

}  // namespace mmoc
