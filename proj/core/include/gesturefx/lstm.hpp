#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gesturefx/matrix.hpp"
#include "gesturefx/rng.hpp"

namespace gesturefx {

// Gate blocks are stacked in this order along the 4H dimension of every
// weight matrix and bias.
enum class Gate : std::size_t { kInput = 0, kForget = 1, kOutput = 2, kCell = 3 };

inline constexpr double kForgetBiasInit = 1.0;

// One LSTM layer: i, f, o = sigmoid(W x + U h + b), g = tanh(W x + U h + b),
// c' = f*c + i*g, h' = o*tanh(c'). No peepholes.
struct LstmParams {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  Matrix w;  // 4H x input_size
  Matrix u;  // 4H x H
  Matrix b;  // 1 x 4H

  static LstmParams zeros(std::size_t input_size, std::size_t hidden_size);
  // Xavier per gate block; forget-gate bias set to kForgetBiasInit.
  static LstmParams xavier(std::size_t input_size, std::size_t hidden_size, Rng& rng);

  std::array<Matrix*, 3> tensors() { return {&w, &u, &b}; }
  std::array<const Matrix*, 3> tensors() const { return {&w, &u, &b}; }

  // Row index of unit `j` of `gate` inside w, u and b.
  std::size_t gate_row(Gate gate, std::size_t j) const {
    return static_cast<std::size_t>(gate) * hidden_size + j;
  }

  void check() const;
  friend bool operator==(const LstmParams&, const LstmParams&) = default;
};

// Activations cached by a forward pass over T steps of a B-row batch. Every
// matrix stacks the steps along rows: step t occupies rows [t*B, (t+1)*B).
struct LstmTape {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  std::size_t batch = 0;
  std::size_t steps = 0;
  Matrix inputs;       // T*B x input_size
  Matrix prev_hidden;  // T*B x H
  Matrix prev_cell;    // T*B x H
  Matrix gates;        // T*B x 4H, post-activation
  Matrix cell;         // T*B x H
  Matrix tanh_cell;    // T*B x H

  std::size_t length() const { return steps; }
  // Hidden state h_t (B x H) emitted at step t.
  Matrix hidden_at(std::size_t t) const;
};

struct LstmWindowResult {
  Matrix hidden;  // final h, B x H
  LstmTape tape;
};

struct LstmGradients {
  LstmParams params;          // same shapes as the forward params
  std::vector<Matrix> input;  // one B x input_size matrix per step
};

// Single step. x is B x input_size, h and c are B x H.
std::pair<Matrix, Matrix> lstm_cell_forward(const Matrix& x, const Matrix& h, const Matrix& c,
                                            const LstmParams& p);

// Folds the cell over `frames` (each B x input_size) from h0 = c0 = 0.
LstmWindowResult lstm_forward_window(std::span<const Matrix> frames, const LstmParams& p);

// BPTT for the scalar sum(dh_final * h_final) + sum_t sum(dh_steps[t] * h_t).
// `dh_steps` may be empty; otherwise it has one entry per step. Parameter
// gradients are accumulated into `grads` (which must match p's shapes); the
// returned vector holds d/dx for every step.
std::vector<Matrix> lstm_backward(const LstmTape& tape, const Matrix& dh_final,
                                  std::span<const Matrix> dh_steps, const LstmParams& p,
                                  LstmParams& grads);

// Convenience form that allocates fresh gradients for dh · h_final.
LstmGradients lstm_backward_window(const LstmTape& tape, const Matrix& dh, const LstmParams& p);

// Inverted dropout. Training: entries zeroed with probability `rate`, survivors
// scaled by 1/(1-rate); the applied per-entry factors are written to `mask`
// when given. Inference: identity and no randomness consumed.
Matrix dropout(const Matrix& v, double rate, Rng& rng, bool training, Matrix* mask = nullptr);

}  // namespace gesturefx
