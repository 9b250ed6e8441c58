#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace structkan {

// Row-major sample matrix: rows = samples, cols = features.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative shape");
  }
  Matrix(int rows, int cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(rows) * cols)
      throw std::invalid_argument("Matrix: data size does not match shape");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double& operator()(int r, int c) {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  std::span<const double> row(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * cols_,
            static_cast<std::size_t>(cols_)};
  }
  std::span<double> row(int r) {
    return {data_.data() + static_cast<std::size_t>(r) * cols_,
            static_cast<std::size_t>(cols_)};
  }

  std::vector<double> column(int c) const {
    std::vector<double> out(rows_);
    for (int r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  void set_column(int c, std::span<const double> values) {
    for (int r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
  }

  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix& other) const = default;

  // Gathers the named columns into a new matrix (one column per entry).
  static Matrix from_columns(const std::vector<std::vector<double>>& cols) {
    if (cols.empty()) return {};
    const int rows = static_cast<int>(cols[0].size());
    Matrix m(rows, static_cast<int>(cols.size()));
    for (int c = 0; c < m.cols(); ++c) {
      if (static_cast<int>(cols[c].size()) != rows)
        throw std::invalid_argument("from_columns: ragged columns");
      for (int r = 0; r < rows; ++r) m(r, c) = cols[c][r];
    }
    return m;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

}  // namespace structkan
