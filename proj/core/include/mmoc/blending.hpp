#pragma once

#include <array>

#include "mmoc/geometry.hpp"

namespace mmoc::mesh {

/// Homeomorphism between the polyhedral computational domain and the physical
/// domain, with explicitly known inverse and Jacobian.
///
/// The annulus map sends a point at polygonal radius fraction s (between the
/// inscribed inner and outer polygon boundaries) to physical radius
/// r_min + s * (r_max - r_min) along the same ray. Polygon corner rays split
/// the plane into sectors; within a sector the map reduces to
///   Phi(x)  = (x . m) / cos(pi/n) * x/|x|,
///   Phi^-1(z) = cos(pi/n) / (z/|z| . m) * z,
/// where m is the sector midline direction. The map is smooth inside every
/// sector and the coarse annulus elements never straddle a sector boundary.
class BlendingMap {
 public:
  enum class Kind { Identity, Annulus };

  BlendingMap() = default;
  static BlendingMap identity() { return BlendingMap(); }
  static BlendingMap annulus(double r_min, double r_max, int n_sides);

  Kind kind() const { return kind_; }
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }

  Vec3 forward(const Vec3& x) const;
  Vec3 inverse(const Vec3& z) const;

  /// Jacobian dPhi/dx at a computational point, row-major 3x3
  /// (z row/column is identity in 2D).
  std::array<double, 9> jacobian(const Vec3& x) const;

 private:
  Kind kind_ = Kind::Identity;
  double r_min_ = 0.0, r_max_ = 0.0;
  int n_sides_ = 0;
  double cos_alpha_ = 1.0;  // cos(pi/n_sides)

  Vec3 sector_midline(const Vec3& p) const;
};

}  // namespace mmoc::mesh
