#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace echochamber {

/// (column, value) pairs sorted by column.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

/// Row-major sparse feature matrix (CSR).
class FeatureMatrix {
 public:
  explicit FeatureMatrix(std::size_t cols = 0) : cols_(cols) {}

  std::size_t rows() const { return offsets_.size() - 1; }
  std::size_t cols() const { return cols_; }

  void add_row(const SparseVector& row);
  void add_dense_row(std::span<const double> row);

  std::span<const std::uint32_t> row_indices(std::size_t r) const {
    return {indices_.data() + offsets_[r], indices_.data() + offsets_[r + 1]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values_.data() + offsets_[r], values_.data() + offsets_[r + 1]};
  }
  double dot(std::size_t r, std::span<const double> w) const;
  std::vector<double> dense_row(std::size_t r) const;
  /// Column-major dense copy; entry (r, c) at c * rows() + r.
  std::vector<double> dense_columns() const;

  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
  /// Same rows with the columns of `other` appended after this one's.
  FeatureMatrix hstack(const FeatureMatrix& other) const;

 private:
  std::size_t cols_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
};

}  // namespace echochamber
