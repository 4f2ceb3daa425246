#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace gesturefx {

// Dense row-major matrix of doubles. Vectors are 1×n matrices throughout the
// library, and a batch of vectors is a B×n matrix with one sample per row.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix identity(std::size_t n);
  static Matrix row_vector(std::span<const double> values);
  static Matrix zeros_like(const Matrix& other) { return Matrix(other.rows_, other.cols_); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void fill(double v);
  bool all_finite() const;
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::string shape_string(const Matrix& m);

// Throws DimensionError naming both shapes unless `a` and `b` have equal shape.
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix hadamard(const Matrix& a, const Matrix& b);

enum class Trans { kNo, kYes };

// c = alpha * op(a) * op(b) + beta * c. `c` must already have the result shape
// unless beta == 0, in which case it is resized.
void gemm(double alpha, const Matrix& a, Trans ta, const Matrix& b, Trans tb, double beta,
          Matrix& c);

// Adds `bias` (1×n) to every row of `m` (B×n).
void add_row_broadcast(Matrix& m, const Matrix& bias);
// Accumulates the column sums of `m` into `out` (1×n).
void accumulate_column_sums(const Matrix& m, Matrix& out);

// Copies rows [first, first + count) of `src` into a new matrix.
Matrix slice_rows(const Matrix& src, std::size_t first, std::size_t count);
// Copies columns [first, first + count) of `src` into a new matrix.
Matrix slice_cols(const Matrix& src, std::size_t first, std::size_t count);
// Horizontal concatenation; all parts share the row count.
Matrix hconcat(std::span<const Matrix> parts);
Matrix vconcat(std::span<const Matrix> parts);

double max_abs(const Matrix& m);

}  // namespace gesturefx
