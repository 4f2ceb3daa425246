#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gesturefx/lstm.hpp"
#include "gesturefx/matrix.hpp"
#include "gesturefx/rng.hpp"

namespace gesturefx {

// One temporal-sliding LSTM network: windows of `window` frames start at
// `delay`, `delay + stride`, ... while they fit the sequence. Without a stride
// there is exactly one window at `delay`. The final hidden states of all
// windows are mean-pooled and, when `projection` is set, mapped to that many
// features by a learned affine layer.
struct TsLstmConfig {
  std::size_t hidden_size = 256;
  std::size_t delay = 0;
  std::size_t window = 1;
  std::optional<std::size_t> stride;
  std::optional<std::size_t> projection;
  // Stacked LSTM layers inside each window. The ensemble networks use one;
  // the double-LSTM baseline uses two.
  std::size_t layers = 1;

  // Throws ConfigError when the config cannot be placed on `seq_len` frames.
  void validate(std::size_t seq_len) const;
  std::size_t output_width() const { return projection.value_or(hidden_size); }

  friend bool operator==(const TsLstmConfig&, const TsLstmConfig&) = default;
};

std::vector<std::size_t> window_positions(std::size_t seq_len, const TsLstmConfig& cfg);

struct TsLstmNetwork {
  TsLstmConfig config;
  std::size_t input_size = 0;
  std::vector<LstmParams> layers;
  Matrix proj_w;  // LN x H, empty without projection
  Matrix proj_b;  // 1 x LN, empty without projection

  static TsLstmNetwork build(const TsLstmConfig& cfg, std::size_t input_size, Rng& rng);
  // Same structure with every tensor zero; used as a gradient accumulator.
  static TsLstmNetwork zeros_like(const TsLstmNetwork& net);

  bool has_projection() const { return config.projection.has_value(); }
  std::size_t output_width() const { return config.output_width(); }
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  // Throws DimensionError if tensor shapes disagree with the config.
  void check() const;

  friend bool operator==(const TsLstmNetwork&, const TsLstmNetwork&) = default;
};

struct TsLstmTape {
  std::size_t seq_len = 0;
  std::size_t batch = 0;
  std::vector<std::size_t> starts;
  // One tape per stacked layer; windows are stacked along the batch rows,
  // window k occupying rows [k*B, (k+1)*B).
  std::vector<LstmTape> layer_tapes;
  Matrix pooled;  // B x H
};

struct TsLstmForward {
  Matrix feature;  // B x output_width
  TsLstmTape tape;
};

// `seq` holds one B x input_size matrix per frame.
TsLstmForward ts_lstm_forward(std::span<const Matrix> seq, const TsLstmNetwork& net);

// Accumulates parameter gradients for sum(dfeature * feature) into `grads`
// (shaped like `net`) and returns the gradient with respect to every frame.
std::vector<Matrix> ts_lstm_backward(const TsLstmTape& tape, const Matrix& dfeature,
                                     const TsLstmNetwork& net, TsLstmNetwork& grads);

}  // namespace gesturefx
