#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mmoc::fem {

struct Triplet {
  std::int64_t row;
  std::int64_t col;
  double value;
};

/// Row-compressed sparse matrix. Operators assembled on the same space share
/// the sparsity pattern, so linear combinations reuse the structure.
class SparseOperator {
 public:
  SparseOperator() = default;

  static SparseOperator from_triplets(std::int64_t n, std::vector<Triplet>& triplets);

  std::int64_t size() const { return static_cast<std::int64_t>(row_ptr_.size()) - 1; }
  std::size_t nnz() const { return values_.size(); }

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;

  /// values := a * A.values + b * B.values (identical patterns required).
  void set_combination(double a, const SparseOperator& A, double b, const SparseOperator& B);

  /// Averages mirrored entries so the stored matrix is exactly symmetric.
  void symmetrize();
  double max_asymmetry() const;

  std::vector<double> diagonal() const;
  double row_sum(std::int64_t i) const;

  /// Dirichlet elimination keeping symmetry: constrained rows and columns are
  /// zeroed and the diagonal set to 1. Right-hand-side lifting is up to the
  /// caller (use the original operator).
  void eliminate(const std::vector<std::uint8_t>& constrained);

  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::int32_t>& cols() const { return cols_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 private:
  std::vector<std::int64_t> row_ptr_;
  std::vector<std::int32_t> cols_;
  std::vector<double> values_;
};

}  // namespace mmoc::fem
