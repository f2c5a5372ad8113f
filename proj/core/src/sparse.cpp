#include "mmoc/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mmoc/error.hpp"

namespace mmoc::fem {

SparseOperator SparseOperator::from_triplets(std::int64_t n, std::vector<Triplet>& triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseOperator op;
  op.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  op.cols_.reserve(triplets.size());
  op.values_.reserve(triplets.size());
  std::size_t i = 0;
  for (std::int64_t row = 0; row < n; ++row) {
    while (i < triplets.size() && triplets[i].row == row) {
      const std::int64_t col = triplets[i].col;
      double v = 0.0;
      while (i < triplets.size() && triplets[i].row == row && triplets[i].col == col)
        v += triplets[i++].value;
      op.cols_.push_back(static_cast<std::int32_t>(col));
      op.values_.push_back(v);
    }
    op.row_ptr_[static_cast<std::size_t>(row) + 1] = static_cast<std::int64_t>(op.cols_.size());
  }
  return op;
}

void SparseOperator::multiply(std::span<const double> x, std::span<double> y) const {
  const auto n = size();
  for (std::int64_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (auto k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1];
         ++k)
      acc += values_[static_cast<std::size_t>(k)] *
             x[static_cast<std::size_t>(cols_[static_cast<std::size_t>(k)])];
    y[static_cast<std::size_t>(r)] = acc;
  }
}

std::vector<double> SparseOperator::multiply(std::span<const double> x) const {
  std::vector<double> y(static_cast<std::size_t>(size()));
  multiply(x, y);
  return y;
}

void SparseOperator::set_combination(double a, const SparseOperator& A, double b,
                                     const SparseOperator& B) {
  if (A.row_ptr_ != B.row_ptr_ || A.cols_ != B.cols_)
    throw ConfigError("operator combination requires identical sparsity patterns");
  row_ptr_ = A.row_ptr_;
  cols_ = A.cols_;
  values_.resize(A.values_.size());
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] = a * A.values_[k] + b * B.values_[k];
}

void SparseOperator::symmetrize() {
  const auto n = size();
  // position of (col, row) for each stored (row, col)
  for (std::int64_t r = 0; r < n; ++r) {
    for (auto k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1];
         ++k) {
      const std::int64_t c = cols_[static_cast<std::size_t>(k)];
      if (c <= r) continue;
      // binary search row c for column r
      auto lo = row_ptr_[static_cast<std::size_t>(c)], hi = row_ptr_[static_cast<std::size_t>(c) + 1];
      const auto* base = cols_.data();
      const auto* found = std::lower_bound(base + lo, base + hi, static_cast<std::int32_t>(r));
      if (found != base + hi && *found == static_cast<std::int32_t>(r)) {
        const auto km = static_cast<std::size_t>(found - base);
        const double avg = 0.5 * (values_[static_cast<std::size_t>(k)] + values_[km]);
        values_[static_cast<std::size_t>(k)] = avg;
        values_[km] = avg;
      }
    }
  }
}

double SparseOperator::max_asymmetry() const {
  const auto n = size();
  double worst = 0.0;
  for (std::int64_t r = 0; r < n; ++r) {
    for (auto k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1];
         ++k) {
      const std::int64_t c = cols_[static_cast<std::size_t>(k)];
      if (c <= r) continue;
      auto lo = row_ptr_[static_cast<std::size_t>(c)], hi = row_ptr_[static_cast<std::size_t>(c) + 1];
      const auto* base = cols_.data();
      const auto* found = std::lower_bound(base + lo, base + hi, static_cast<std::int32_t>(r));
      double mirror = 0.0;
      if (found != base + hi && *found == static_cast<std::int32_t>(r))
        mirror = values_[static_cast<std::size_t>(found - base)];
      worst = std::max(worst, std::abs(values_[static_cast<std::size_t>(k)] - mirror));
    }
  }
  return worst;
}

std::vector<double> SparseOperator::diagonal() const {
  const auto n = size();
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t r = 0; r < n; ++r)
    for (auto k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1];
         ++k)
      if (cols_[static_cast<std::size_t>(k)] == r) d[static_cast<std::size_t>(r)] = values_[static_cast<std::size_t>(k)];
  return d;
}

double SparseOperator::row_sum(std::int64_t i) const {
  double s = 0.0;
  for (auto k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1];
       ++k)
    s += values_[static_cast<std::size_t>(k)];
  return s;
}

void SparseOperator::eliminate(const std::vector<std::uint8_t>& constrained) {
  const auto n = size();
  for (std::int64_t r = 0; r < n; ++r) {
    const bool row_fixed = constrained[static_cast<std::size_t>(r)] != 0;
    for (auto k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1];
         ++k) {
      const auto c = cols_[static_cast<std::size_t>(k)];
      const bool col_fixed = constrained[static_cast<std::size_t>(c)] != 0;
      if (row_fixed || col_fixed)
        values_[static_cast<std::size_t>(k)] = (r == c && row_fixed) ? 1.0 : (row_fixed || col_fixed ? 0.0 : values_[static_cast<std::size_t>(k)]);
    }
  }
}

}  // namespace mmoc::fem
