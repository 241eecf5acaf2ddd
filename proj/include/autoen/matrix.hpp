#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "autoen/error.hpp"

namespace autoen {

/// Dense row-major matrix of doubles. Used both for numeric feature
/// matrices and for n_samples x n_classes probability outputs.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& values() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// n_samples x n_classes, row-stochastic by contract.
using ProbabilityMatrix = Matrix;

/// Divides every row by its sum; rows already within `tolerance` of 1 are
/// left untouched. Rows summing to zero become uniform.
inline void normalize_rows(Matrix& m, double tolerance = 0.0) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    double sum = 0.0;
    for (double v : row) sum += v;
    if (std::abs(sum - 1.0) <= tolerance) continue;
    if (sum > 0.0) {
      for (double& v : row) v /= sum;
    } else {
      for (double& v : row) v = 1.0 / static_cast<double>(row.size());
    }
  }
}

inline Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < m.rows(), ErrorCode::InvalidArgument, "row index out of range");
    auto src = m.row(rows[i]);
    auto dst = out.row(i);
    for (std::size_t c = 0; c < m.cols(); ++c) dst[c] = src[c];
  }
  return out;
}

}  // namespace autoen
