#include "echochamber/matrix.hpp"

#include "echochamber/error.hpp"

namespace echochamber {

void FeatureMatrix::add_row(const SparseVector& row) {
  for (const auto& [c, v] : row) {
    if (c >= cols_) throw InvalidArgument("feature column out of range");
    indices_.push_back(c);
    values_.push_back(v);
  }
  offsets_.push_back(indices_.size());
}

void FeatureMatrix::add_dense_row(std::span<const double> row) {
  if (row.size() != cols_) throw InvalidArgument("dense row has wrong width");
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (row[c] == 0.0) continue;
    indices_.push_back(static_cast<std::uint32_t>(c));
    values_.push_back(row[c]);
  }
  offsets_.push_back(indices_.size());
}

double FeatureMatrix::dot(std::size_t r, std::span<const double> w) const {
  double s = 0.0;
  for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) s += values_[k] * w[indices_[k]];
  return s;
}

std::vector<double> FeatureMatrix::dense_row(std::size_t r) const {
  std::vector<double> out(cols_, 0.0);
  for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) out[indices_[k]] = values_[k];
  return out;
}

std::vector<double> FeatureMatrix::dense_columns() const {
  const std::size_t n = rows();
  std::vector<double> out(n * cols_, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) out[indices_[k] * n + r] = values_[k];
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  FeatureMatrix out(cols_);
  for (std::size_t r : rows) {
    for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      out.indices_.push_back(indices_[k]);
      out.values_.push_back(values_[k]);
    }
    out.offsets_.push_back(out.indices_.size());
  }
  return out;
}

FeatureMatrix FeatureMatrix::hstack(const FeatureMatrix& other) const {
  if (other.rows() != rows()) throw InvalidArgument("hstack: row counts differ");
  FeatureMatrix out(cols_ + other.cols_);
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      out.indices_.push_back(indices_[k]);
      out.values_.push_back(values_[k]);
    }
    for (std::size_t k = other.offsets_[r]; k < other.offsets_[r + 1]; ++k) {
      out.indices_.push_back(static_cast<std::uint32_t>(other.indices_[k] + cols_));
      out.values_.push_back(other.values_[k]);
    }
    out.offsets_.push_back(out.indices_.size());
  }
  return out;
}

}  // namespace echochamber
