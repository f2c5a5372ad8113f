#pragma once

#include <cstdint>

#include "mmoc/field.hpp"

namespace mmoc::fem {

struct EvalStats {
  std::uint64_t clamps = 0;        // points projected back into the domain
  std::uint64_t global_scans = 0;  // macro located by scanning all volumes
  std::uint64_t cell_fallbacks = 0;

  void reset() { *this = EvalStats{}; }
  EvalStats& operator+=(const EvalStats& o) {
    clamps += o.clamps;
    global_scans += o.global_scans;
    cell_fallbacks += o.cell_fallbacks;
    return *this;
  }
};

enum class OutsidePolicy { Clamp, Error };

struct ElementLocation {
  std::int32_t macro = -1;
  std::int32_t lat_elem = -1;
  std::array<double, 4> mu{};  // barycentric inside the micro-element

  bool valid() const { return macro >= 0; }
};

/// Two-step search-locate on the computational domain: the containing volume
/// primitive is found from a hint (then its neighborhood, then globally), the
/// micro-element inside the block by lattice index arithmetic.
class FieldEvaluator {
 public:
  explicit FieldEvaluator(const mesh::MeshHierarchy& h);

  const mesh::MeshHierarchy& hierarchy() const { return *h_; }

  /// Locate a computational point. Returns an invalid location if the point
  /// lies outside the domain (no clamping at this layer).
  ElementLocation locate_comp(const Vec3& x_comp, std::int32_t hint_volume,
                              EvalStats* stats = nullptr) const;

  /// Locate a physical point under the given out-of-domain policy. On clamping
  /// the projected physical point is written back through `point`.
  ElementLocation locate(Vec3& point, std::int32_t hint_volume, OutsidePolicy policy,
                         EvalStats* stats = nullptr) const;

  double evaluate(const ScalarField& f, const ElementLocation& loc) const;
  Vec3 evaluate(const VectorField& f, const ElementLocation& loc) const;

  /// Spec-level entry point: evaluate at a physical point starting from a
  /// primitive hint (any kind).
  double evaluate(const ScalarField& f, const Vec3& z, std::int64_t hint_primitive,
                  OutsidePolicy policy = OutsidePolicy::Error, EvalStats* stats = nullptr) const;
  Vec3 evaluate(const VectorField& f, const Vec3& z, std::int64_t hint_primitive,
                OutsidePolicy policy = OutsidePolicy::Error, EvalStats* stats = nullptr) const;

 private:
  const mesh::MeshHierarchy* h_;
  const mesh::RefinedLattice* lat_;
  int dim_;
  int n_;
  bool blended_;

  bool micro_locate(const std::array<double, 4>& lambda, ElementLocation& loc,
                    EvalStats* stats) const;
};

}  // namespace mmoc::fem
