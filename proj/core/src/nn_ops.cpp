#include "gesturefx/nn_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gesturefx/error.hpp"

namespace gesturefx {
namespace {

void softmax_into(std::span<const double> logits, std::span<double> out) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& p : out) p /= total;
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw ArgumentError("softmax of an empty vector");
  for (double v : logits) {
    if (!std::isfinite(v)) throw ArgumentError("softmax input is not finite");
  }
  std::vector<double> out(logits.size());
  softmax_into(logits, out);
  return out;
}

Matrix softmax_rows(const Matrix& logits) {
  if (logits.cols() == 0) throw ArgumentError("softmax of an empty vector");
  if (!logits.all_finite()) throw ArgumentError("softmax input is not finite");
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) softmax_into(logits.row(r), out.row(r));
  return out;
}

double cross_entropy(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size()) {
    throw ArgumentError("cross_entropy: label " + std::to_string(label) + " out of range for " +
                        std::to_string(probs.size()) + " classes");
  }
  return -std::log(std::max(probs[label], kProbabilityFloor));
}

Matrix xavier_init(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-bound, bound);
  return m;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace gesturefx
