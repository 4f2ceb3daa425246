#include "gesturefx/ts_lstm.hpp"

#include <string>

#include "gesturefx/error.hpp"
#include "gesturefx/nn_ops.hpp"

namespace gesturefx {

void TsLstmConfig::validate(std::size_t seq_len) const {
  if (hidden_size == 0) throw ConfigError("TS-LSTM hidden size must be >= 1");
  if (window == 0) throw ConfigError("TS-LSTM window length must be >= 1");
  if (layers == 0) throw ConfigError("TS-LSTM needs at least one LSTM layer");
  if (stride && *stride == 0) throw ConfigError("TS-LSTM sliding stride must be >= 1");
  if (projection && *projection == 0) throw ConfigError("TS-LSTM projection width must be >= 1");
  if (delay + window > seq_len) {
    throw ConfigError("TS-LSTM delay " + std::to_string(delay) + " + window " +
                      std::to_string(window) + " exceeds sequence length " +
                      std::to_string(seq_len));
  }
}

std::vector<std::size_t> window_positions(std::size_t seq_len, const TsLstmConfig& cfg) {
  cfg.validate(seq_len);
  if (!cfg.stride) return {cfg.delay};
  std::vector<std::size_t> starts;
  for (std::size_t s = cfg.delay; s + cfg.window <= seq_len; s += *cfg.stride) starts.push_back(s);
  return starts;
}

TsLstmNetwork TsLstmNetwork::build(const TsLstmConfig& cfg, std::size_t input_size, Rng& rng) {
  if (input_size == 0) throw ConfigError("TS-LSTM input width must be >= 1");
  if (cfg.hidden_size == 0 || cfg.layers == 0) throw ConfigError("invalid TS-LSTM sizes");
  TsLstmNetwork net;
  net.config = cfg;
  net.input_size = input_size;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    net.layers.push_back(LstmParams::xavier(l == 0 ? input_size : cfg.hidden_size,
                                            cfg.hidden_size, rng));
  }
  if (cfg.projection) {
    net.proj_w = xavier_init(*cfg.projection, cfg.hidden_size, rng);
    net.proj_b = Matrix(1, *cfg.projection);
  }
  return net;
}

TsLstmNetwork TsLstmNetwork::zeros_like(const TsLstmNetwork& net) {
  TsLstmNetwork z;
  z.config = net.config;
  z.input_size = net.input_size;
  for (const auto& layer : net.layers) {
    z.layers.push_back(LstmParams::zeros(layer.input_size, layer.hidden_size));
  }
  z.proj_w = Matrix::zeros_like(net.proj_w);
  z.proj_b = Matrix::zeros_like(net.proj_b);
  return z;
}

std::vector<Matrix*> TsLstmNetwork::tensors() {
  std::vector<Matrix*> out;
  for (auto& layer : layers) {
    for (Matrix* t : layer.tensors()) out.push_back(t);
  }
  if (has_projection()) {
    out.push_back(&proj_w);
    out.push_back(&proj_b);
  }
  return out;
}

std::vector<const Matrix*> TsLstmNetwork::tensors() const {
  std::vector<const Matrix*> out;
  for (const auto& layer : layers) {
    for (const Matrix* t : layer.tensors()) out.push_back(t);
  }
  if (has_projection()) {
    out.push_back(&proj_w);
    out.push_back(&proj_b);
  }
  return out;
}

void TsLstmNetwork::check() const {
  if (layers.size() != config.layers) {
    throw DimensionError("TS-LSTM has " + std::to_string(layers.size()) + " layers, config says " +
                         std::to_string(config.layers));
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].check();
    const std::size_t expected_in = l == 0 ? input_size : config.hidden_size;
    if (layers[l].hidden_size != config.hidden_size || layers[l].input_size != expected_in) {
      throw DimensionError("TS-LSTM layer " + std::to_string(l) + " sizes disagree with config");
    }
  }
  if (has_projection()) {
    if (proj_w.rows() != *config.projection || proj_w.cols() != config.hidden_size ||
        proj_b.rows() != 1 || proj_b.cols() != *config.projection) {
      throw DimensionError("TS-LSTM projection " + shape_string(proj_w) + " / " +
                           shape_string(proj_b) + " disagrees with width " +
                           std::to_string(*config.projection));
    }
  } else if (!proj_w.empty() || !proj_b.empty()) {
    throw DimensionError("TS-LSTM carries projection tensors but config has none");
  }
}

TsLstmForward ts_lstm_forward(std::span<const Matrix> seq, const TsLstmNetwork& net) {
  const auto starts = window_positions(seq.size(), net.config);
  const std::size_t batch = seq.front().rows();
  for (const auto& frame : seq) {
    if (frame.rows() != batch || frame.cols() != net.input_size) {
      throw DimensionError("ts_lstm_forward: frame " + shape_string(frame) +
                           " for input width " + std::to_string(net.input_size));
    }
  }
  const std::size_t n_windows = starts.size();
  const std::size_t width = net.config.window;

  // Stack the windows along rows so one LSTM pass covers all of them.
  std::vector<Matrix> stacked;
  stacked.reserve(width);
  std::vector<Matrix> parts(n_windows);
  for (std::size_t t = 0; t < width; ++t) {
    for (std::size_t k = 0; k < n_windows; ++k) parts[k] = seq[starts[k] + t];
    stacked.push_back(vconcat(parts));
  }

  TsLstmForward out;
  out.tape.seq_len = seq.size();
  out.tape.batch = batch;
  out.tape.starts = starts;
  Matrix final_h;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto res = lstm_forward_window(stacked, net.layers[l]);
    final_h = std::move(res.hidden);
    if (l + 1 < net.layers.size()) {
      for (std::size_t t = 0; t < width; ++t) stacked[t] = res.tape.hidden_at(t);
    }
    out.tape.layer_tapes.push_back(std::move(res.tape));
  }

  const std::size_t hs = net.config.hidden_size;
  Matrix pooled(batch, hs);
  for (std::size_t k = 0; k < n_windows; ++k) {
    for (std::size_t i = 0; i < batch * hs; ++i) pooled[i] += final_h[k * batch * hs + i];
  }
  pooled *= 1.0 / static_cast<double>(n_windows);

  if (net.has_projection()) {
    gemm(1.0, pooled, Trans::kNo, net.proj_w, Trans::kYes, 0.0, out.feature);
    add_row_broadcast(out.feature, net.proj_b);
  } else {
    out.feature = pooled;
  }
  out.tape.pooled = std::move(pooled);
  return out;
}

std::vector<Matrix> ts_lstm_backward(const TsLstmTape& tape, const Matrix& dfeature,
                                     const TsLstmNetwork& net, TsLstmNetwork& grads) {
  if (tape.layer_tapes.size() != net.layers.size() || tape.starts.empty() ||
      tape.pooled.cols() != net.config.hidden_size) {
    throw StateError("TS-LSTM tape does not match network");
  }
  if (grads.layers.size() != net.layers.size() ||
      grads.has_projection() != net.has_projection()) {
    throw StateError("TS-LSTM gradient container does not match network");
  }
  const std::size_t batch = tape.batch;
  if (dfeature.rows() != batch || dfeature.cols() != net.output_width()) {
    throw DimensionError("ts_lstm_backward: dfeature " + shape_string(dfeature) + " expected " +
                         std::to_string(batch) + "x" + std::to_string(net.output_width()));
  }

  Matrix dpooled;
  if (net.has_projection()) {
    gemm(1.0, dfeature, Trans::kNo, net.proj_w, Trans::kNo, 0.0, dpooled);
    gemm(1.0, dfeature, Trans::kYes, tape.pooled, Trans::kNo, 1.0, grads.proj_w);
    accumulate_column_sums(dfeature, grads.proj_b);
  } else {
    dpooled = dfeature;
  }

  const std::size_t n_windows = tape.starts.size();
  const std::size_t hs = net.config.hidden_size;
  Matrix dh_final(n_windows * batch, hs);
  const double share = 1.0 / static_cast<double>(n_windows);
  for (std::size_t k = 0; k < n_windows; ++k) {
    for (std::size_t i = 0; i < batch * hs; ++i) dh_final[k * batch * hs + i] = dpooled[i] * share;
  }

  std::vector<Matrix> dx;
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    if (l + 1 == net.layers.size()) {
      dx = lstm_backward(tape.layer_tapes[l], dh_final, {}, net.layers[l], grads.layers[l]);
    } else {
      const Matrix zero(n_windows * batch, hs);
      dx = lstm_backward(tape.layer_tapes[l], zero, dx, net.layers[l], grads.layers[l]);
    }
  }

  std::vector<Matrix> dseq(tape.seq_len, Matrix(batch, net.input_size));
  for (std::size_t t = 0; t < dx.size(); ++t) {
    for (std::size_t k = 0; k < n_windows; ++k) {
      Matrix& target = dseq[tape.starts[k] + t];
      const double* src = dx[t].data() + k * batch * net.input_size;
      for (std::size_t i = 0; i < target.size(); ++i) target[i] += src[i];
    }
  }
  return dseq;
}

}  // namespace gesturefx
