#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace kam {

// Dense column-major matrix. Columns are contiguous, so a spectrogram frame
// (one column) is a single span.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[c * rows_ + r];
  }
  const T& operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[c * rows_ + r];
  }

  std::span<T> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const T> col(std::size_t c) const {
    return {data_.data() + c * rows_, rows_};
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace kam
