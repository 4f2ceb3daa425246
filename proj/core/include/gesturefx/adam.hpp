#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gesturefx/matrix.hpp"

namespace gesturefx {

struct AdamHyper {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment estimates for one ordered list of parameter tensors.
struct AdamState {
  AdamHyper hyper;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::int64_t step = 0;

  AdamState() = default;
  AdamState(AdamHyper h, std::span<const Matrix* const> params);
};

// Increments state.step, then applies the bias-corrected Adam update
//   theta -= lr * m_hat / (sqrt(v_hat) + eps)
// to every tensor. `params`, `grads` and the moment lists are parallel.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               AdamState& state);

}  // namespace gesturefx
