#include "gesturefx/adam.hpp"

#include <cmath>
#include <string>

#include "gesturefx/error.hpp"

namespace gesturefx {

AdamState::AdamState(AdamHyper h, std::span<const Matrix* const> params) : hyper(h) {
  if (!(h.learning_rate > 0.0)) throw ArgumentError("Adam learning rate must be positive");
  first_moment.reserve(params.size());
  second_moment.reserve(params.size());
  for (const Matrix* p : params) {
    first_moment.push_back(Matrix::zeros_like(*p));
    second_moment.push_back(Matrix::zeros_like(*p));
  }
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                         std::to_string(grads.size()) + " gradients, " +
                         std::to_string(state.first_moment.size()) + " moment slots");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(*params[i], *grads[i], "adam_step gradient");
    require_same_shape(*params[i], state.first_moment[i], "adam_step moment");
  }

  ++state.step;
  const auto& h = state.hyper;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(h.beta1, t);
  const double correction2 = 1.0 - std::pow(h.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    double* theta = params[i]->data();
    const double* g = grads[i]->data();
    double* m = state.first_moment[i].data();
    double* v = state.second_moment[i].data();
    const std::size_t n = params[i]->size();
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = h.beta1 * m[j] + (1.0 - h.beta1) * g[j];
      v[j] = h.beta2 * v[j] + (1.0 - h.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      theta[j] -= h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
    }
  }
}

}  // namespace gesturefx
