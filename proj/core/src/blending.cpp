#include "mmoc/blending.hpp"

#include <cmath>

#include "mmoc/error.hpp"

namespace mmoc::mesh {

BlendingMap BlendingMap::annulus(double r_min, double r_max, int n_sides) {
  if (!(0.0 < r_min && r_min < r_max) || n_sides < 3)
    throw ConfigError("annulus blending: need 0 < r_min < r_max and n_sides >= 3");
  BlendingMap map;
  map.kind_ = Kind::Annulus;
  map.r_min_ = r_min;
  map.r_max_ = r_max;
  map.n_sides_ = n_sides;
  map.cos_alpha_ = std::cos(M_PI / n_sides);
  return map;
}

Vec3 BlendingMap::sector_midline(const Vec3& p) const {
  const double step = 2.0 * M_PI / n_sides_;
  double theta = std::atan2(p.y, p.x);
  if (theta < 0.0) theta += 2.0 * M_PI;
  int j = static_cast<int>(std::floor(theta / step));
  if (j >= n_sides_) j = n_sides_ - 1;
  const double mid = (j + 0.5) * step;
  return {std::cos(mid), std::sin(mid), 0.0};
}

Vec3 BlendingMap::forward(const Vec3& x) const {
  if (kind_ == Kind::Identity) return x;
  const double rho = std::hypot(x.x, x.y);
  if (rho == 0.0) throw OutOfDomainError("annulus blending undefined at the origin", x);
  const Vec3 m = sector_midline(x);
  const double r_phy = (x.x * m.x + x.y * m.y) / cos_alpha_;
  const double scale = r_phy / rho;
  return {scale * x.x, scale * x.y, 0.0};
}

Vec3 BlendingMap::inverse(const Vec3& z) const {
  if (kind_ == Kind::Identity) return z;
  const double r = std::hypot(z.x, z.y);
  if (r == 0.0) throw OutOfDomainError("annulus blending undefined at the origin", z);
  const Vec3 m = sector_midline(z);
  const double scale = cos_alpha_ * r / (z.x * m.x + z.y * m.y);
  return {scale * z.x, scale * z.y, 0.0};
}

std::array<double, 9> BlendingMap::jacobian(const Vec3& x) const {
  std::array<double, 9> jac{1, 0, 0, 0, 1, 0, 0, 0, 1};
  if (kind_ == Kind::Identity) return jac;
  // Phi(x) = g(x) x with g = (x . m) / (cos_alpha * |x|); smooth per sector.
  const double rho = std::hypot(x.x, x.y);
  const Vec3 m = sector_midline(x);
  const double xm = x.x * m.x + x.y * m.y;
  const double g = xm / (cos_alpha_ * rho);
  const double gx = (m.x / rho - xm * x.x / (rho * rho * rho)) / cos_alpha_;
  const double gy = (m.y / rho - xm * x.y / (rho * rho * rho)) / cos_alpha_;
  jac[0] = g + x.x * gx;
  jac[1] = x.x * gy;
  jac[3] = x.y * gx;
  jac[4] = g + x.y * gy;
  return jac;
}

}  // namespace mmoc::mesh
