#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gesturefx/matrix.hpp"
#include "gesturefx/rng.hpp"

namespace gesturefx {

inline constexpr double kProbabilityFloor = 1e-12;

// Max-shifted softmax of a non-empty finite vector.
std::vector<double> softmax(std::span<const double> logits);
// Row-wise softmax of a B×K logit matrix.
Matrix softmax_rows(const Matrix& logits);

// -ln(max(p[label], 1e-12)).
double cross_entropy(std::span<const double> probs, std::size_t label);

// Uniform Xavier/Glorot initialization in ±sqrt(6 / (rows + cols)).
Matrix xavier_init(std::size_t rows, std::size_t cols, Rng& rng);

double sigmoid(double x);

}  // namespace gesturefx
