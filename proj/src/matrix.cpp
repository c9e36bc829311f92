// SPDX-License-Identifier: Apache-2.0

#include "asem/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "asem/error.hpp"

namespace asem {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap view(const Matrix& m) {
  return ConstMap(m.values().data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}

MutMap view(Matrix& m) {
  return MutMap(m.values().data(), static_cast<Eigen::Index>(m.rows()),
                static_cast<Eigen::Index>(m.cols()));
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(rows * cols) +
                                              " values for " + std::to_string(rows) + "x" +
                                              std::to_string(cols) + ", got " +
                                              std::to_string(data_.size()));
  }
  for (std::size_t k = 0; k < data_.size(); ++k) {
    if (!std::isfinite(data_[k])) {
      throw Error(ErrorCode::NonFiniteValue, "entry (" + std::to_string(k / cols) + "," +
                                                 std::to_string(k % cols) + ")");
    }
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != cols_) {
      throw Error(ErrorCode::ShapeMismatch, "ragged initializer at row " + std::to_string(r));
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFiniteValue, "initializer row " + std::to_string(r));
      }
      data_.push_back(v);
    }
    ++r;
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

Matrix Matrix::gather_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= rows_) {
      throw Error(ErrorCode::OutOfRange, "row index " + std::to_string(indices[k]) +
                                             " >= " + std::to_string(rows_));
    }
    std::ranges::copy(row(indices[k]), out.row(k).begin());
  }
  return out;
}

bool Matrix::all_finite() const noexcept {
  return std::ranges::all_of(data_, [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "matmul " + shape(a) + " * " + shape(b));
  }
  Matrix out(a.rows(), b.cols());
  if (!out.empty()) view(out).noalias() = view(a) * view(b);
  return out;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "matmul_at_b " + shape(a) + "^T * " + shape(b));
  }
  Matrix out(a.cols(), b.cols());
  if (!out.empty()) view(out).noalias() = view(a).transpose() * view(b);
  return out;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "matmul_a_bt " + shape(a) + " * " + shape(b) + "^T");
  }
  Matrix out(a.rows(), b.rows());
  if (!out.empty()) view(out).noalias() = view(a) * view(b).transpose();
  return out;
}

}  // namespace asem
