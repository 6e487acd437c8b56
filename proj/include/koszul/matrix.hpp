#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "koszul/error.hpp"

namespace koszul {

/// Dense row-major matrix. Used both for exact integers and for residues mod m.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = T{1};
    return out;
  }

  static Matrix from_rows(const std::vector<std::vector<T>>& rows) {
    if (rows.empty()) return Matrix();
    Matrix out(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != out.cols_) throw InvalidInput("ragged matrix rows");
      for (std::size_t c = 0; c < out.cols_; ++c) out(r, c) = rows[r][c];
    }
    return out;
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  [[nodiscard]] std::vector<T> column(std::size_t c) const {
    std::vector<T> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  [[nodiscard]] Matrix transpose() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
  }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t c = 0; c < cols_; ++c) std::swap((*this)(a, c), (*this)(b, c));
  }
  void swap_cols(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t r = 0; r < rows_; ++r) std::swap((*this)(r, a), (*this)(r, b));
  }

  /// Appends the columns of `other` (same row count) on the right.
  [[nodiscard]] Matrix hconcat(const Matrix& other) const {
    if (empty() && rows_ == 0) return other;
    if (other.rows_ != rows_) throw InvalidInput("hconcat: row count mismatch");
    Matrix out(rows_, cols_ + other.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) out(r, c) = (*this)(r, c);
      for (std::size_t c = 0; c < other.cols_; ++c) out(r, cols_ + c) = other(r, c);
    }
    return out;
  }

  void append_column(const std::vector<T>& col) {
    if (cols_ == 0 && rows_ == 0) rows_ = col.size();
    if (col.size() != rows_) throw InvalidInput("append_column: size mismatch");
    Matrix out(rows_, cols_ + 1);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) out(r, c) = (*this)(r, c);
      out(r, cols_) = col[r];
    }
    *this = std::move(out);
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw InvalidInput("matrix product: shape mismatch");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T& aik = a(i, k);
        if (aik == T{0}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend std::ostream& operator<<(std::ostream& os, const Matrix& m) {
    os << '[';
    for (std::size_t r = 0; r < m.rows_; ++r) {
      os << (r ? "; " : "");
      for (std::size_t c = 0; c < m.cols_; ++c) os << (c ? " " : "") << m(r, c);
    }
    return os << ']';
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace koszul
