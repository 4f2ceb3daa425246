#include "gesturefx/matrix.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gesturefx/error.hpp"

namespace gesturefx {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMut = Eigen::Map<RowMajor>;
using MapConst = Eigen::Map<const RowMajor>;

MapConst view(const Matrix& m) {
  return MapConst(m.data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}

MapMut view(Matrix& m) {
  return MapMut(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                         " does not match shape " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::row_vector(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "matrix +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "matrix -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

std::string shape_string(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " + shape_string(a) + " vs " +
                         shape_string(b));
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + shape_string(a) + " by " + shape_string(b));
  }
  Matrix c(a.rows(), b.cols());
  gemm(1.0, a, Trans::kNo, b, Trans::kNo, 0.0, c);
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  return t;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] * b[i];
  return c;
}

void gemm(double alpha, const Matrix& a, Trans ta, const Matrix& b, Trans tb, double beta,
          Matrix& c) {
  const std::size_t m = ta == Trans::kNo ? a.rows() : a.cols();
  const std::size_t k = ta == Trans::kNo ? a.cols() : a.rows();
  const std::size_t kb = tb == Trans::kNo ? b.rows() : b.cols();
  const std::size_t n = tb == Trans::kNo ? b.cols() : b.rows();
  if (k != kb) {
    throw DimensionError("gemm: inner dimensions differ for " + shape_string(a) + " and " +
                         shape_string(b));
  }
  if (beta == 0.0) {
    if (c.rows() != m || c.cols() != n) c = Matrix(m, n);
  } else if (c.rows() != m || c.cols() != n) {
    throw DimensionError("gemm: accumulator shape " + shape_string(c) + " expected " +
                         std::to_string(m) + "x" + std::to_string(n));
  }
  auto out = view(c);
  if (beta == 0.0) {
    out.setZero();
  } else if (beta != 1.0) {
    out *= beta;
  }
  if (m == 0 || n == 0 || k == 0) return;
  const auto av = view(a);
  const auto bv = view(b);
  if (ta == Trans::kNo && tb == Trans::kNo) {
    out.noalias() += alpha * av * bv;
  } else if (ta == Trans::kNo) {
    out.noalias() += alpha * av * bv.transpose();
  } else if (tb == Trans::kNo) {
    out.noalias() += alpha * av.transpose() * bv;
  } else {
    out.noalias() += alpha * av.transpose() * bv.transpose();
  }
}

void add_row_broadcast(Matrix& m, const Matrix& bias) {
  if (bias.rows() != 1 || bias.cols() != m.cols()) {
    throw DimensionError("bias " + shape_string(bias) + " cannot broadcast over " +
                         shape_string(m));
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) row[c] += bias[c];
  }
}

void accumulate_column_sums(const Matrix& m, Matrix& out) {
  if (out.rows() != 1 || out.cols() != m.cols()) {
    throw DimensionError("column-sum target " + shape_string(out) + " does not fit " +
                         shape_string(m));
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += row[c];
  }
}

Matrix slice_rows(const Matrix& src, std::size_t first, std::size_t count) {
  if (first + count > src.rows()) {
    throw DimensionError("row slice out of range for " + shape_string(src));
  }
  Matrix out(count, src.cols());
  std::copy_n(src.data() + first * src.cols(), count * src.cols(), out.data());
  return out;
}

Matrix slice_cols(const Matrix& src, std::size_t first, std::size_t count) {
  if (first + count > src.cols()) {
    throw DimensionError("column slice out of range for " + shape_string(src));
  }
  Matrix out(src.rows(), count);
  for (std::size_t r = 0; r < src.rows(); ++r) {
    std::copy_n(src.data() + r * src.cols() + first, count, out.data() + r * count);
  }
  return out;
}

Matrix hconcat(std::span<const Matrix> parts) {
  if (parts.empty()) return {};
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw DimensionError("hconcat: row counts differ");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(p.data() + r * p.cols(), p.cols(), out.data() + r * cols + offset);
    }
    offset += p.cols();
  }
  return out;
}

Matrix vconcat(std::span<const Matrix> parts) {
  if (parts.empty()) return {};
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw DimensionError("vconcat: column counts differ");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  double* dst = out.data();
  for (const auto& p : parts) dst = std::copy_n(p.data(), p.size(), dst);
  return out;
}

double max_abs(const Matrix& m) {
  double best = 0.0;
  for (double v : m.values()) best = std::max(best, std::abs(v));
  return best;
}

}  // namespace gesturefx
