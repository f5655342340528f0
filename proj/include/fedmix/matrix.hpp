#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "fedmix/errors.hpp"

namespace fedmix {

// Dense row-major matrix of doubles. Deliberately minimal: the model sizes
// here never justify BLAS, and plain loops keep results bit-reproducible.
class Matrix {
 public:
  Matrix() = default;

  Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw ShapeError("Matrix: negative dimension");
    data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
  }

  Matrix(int rows, int cols, std::vector<double> values)
      : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (rows < 0 || cols < 0) throw ShapeError("Matrix: negative dimension");
    if (data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
      throw ShapeError("Matrix: value count does not match " + std::to_string(rows) + "x" +
                       std::to_string(cols));
    }
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const int r = static_cast<int>(rows.size());
    const int c = r == 0 ? 0 : static_cast<int>(rows.begin()->size());
    Matrix m(r, c);
    int i = 0;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != c) throw ShapeError("Matrix::from_rows: ragged rows");
      int j = 0;
      for (double v : row) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(int r, int c) {
    return data_[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
                 static_cast<std::size_t>(c)];
  }
  double operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
                 static_cast<std::size_t>(c)];
  }

  double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const double* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  // New matrix holding the given rows, in the given order.
  Matrix take_rows(const std::vector<int>& idx) const {
    Matrix out(static_cast<int>(idx.size()), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const int r = idx[i];
      if (r < 0 || r >= rows_) throw ContractError("Matrix::take_rows: row index out of range");
      const double* src = row(r);
      double* dst = out.row(static_cast<int>(i));
      for (int c = 0; c < cols_; ++c) dst[c] = src[c];
    }
    return out;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

}  // namespace fedmix
