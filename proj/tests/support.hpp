#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "gesturefx/matrix.hpp"
#include "gesturefx/rng.hpp"
#include "gesturefx/skeleton.hpp"

namespace gfx_test {

using gesturefx::Matrix;

inline Matrix random_matrix(std::size_t rows, std::size_t cols, gesturefx::Rng& rng,
                            double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

// Triple loop, no blocking, no library.
inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  }
  return c;
}

// Central difference of f with respect to every entry of `x`.
inline Matrix numeric_gradient(Matrix& x, const std::function<double()>& f, double h = 1e-5) {
  Matrix g = Matrix::zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f();
    x[i] = saved - h;
    const double down = f();
    x[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double max_rel_error(const Matrix& analytic, const Matrix& numeric, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
  }
  return worst;
}

inline double frobenius_dot(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// A full-confidence sequence where joint j sits at (x0 + j*dx + t*vx, y0 + j*dy).
inline gesturefx::SkeletonSequence ramp_sequence(std::size_t frames, double vx = 0.01) {
  gesturefx::SkeletonSequence s;
  s.id = "ramp";
  for (std::size_t t = 0; t < frames; ++t) {
    gesturefx::KeypointFrame f;
    for (std::size_t j = 0; j < gesturefx::kJointCount; ++j) {
      f[j] = {0.2 + 0.03 * static_cast<double>(j) + vx * static_cast<double>(t),
              0.1 + 0.04 * static_cast<double>(j), 1.0, false};
    }
    s.frames.push_back(f);
  }
  return s;
}

}  // namespace gfx_test
