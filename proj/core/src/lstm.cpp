#include "gesturefx/lstm.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>

#include "gesturefx/error.hpp"
#include "gesturefx/nn_ops.hpp"

namespace gesturefx {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMut = Eigen::Map<RowMajor>;
using MapConst = Eigen::Map<const RowMajor>;
using Eigen::Index;

MapConst view(const Matrix& m) {
  return MapConst(m.data(), static_cast<Index>(m.rows()), static_cast<Index>(m.cols()));
}
MapMut view(Matrix& m) {
  return MapMut(m.data(), static_cast<Index>(m.rows()), static_cast<Index>(m.cols()));
}
// Rows [t*B, (t+1)*B) of a step-stacked tape matrix.
MapConst step_block(const Matrix& m, std::size_t t, std::size_t batch) {
  return MapConst(m.data() + t * batch * m.cols(), static_cast<Index>(batch),
                  static_cast<Index>(m.cols()));
}
MapMut step_block(Matrix& m, std::size_t t, std::size_t batch) {
  return MapMut(m.data() + t * batch * m.cols(), static_cast<Index>(batch),
                static_cast<Index>(m.cols()));
}

// Eigen's packet exp and its scalar fallback can differ in the last bit, and
// which one an element gets depends on its address. Activations are therefore
// evaluated in an aligned scratch buffer so results depend only on values and
// shapes, never on where a block happens to live.
void sigmoid_in_scratch(Eigen::ArrayXd& a) { a = (1.0 + (-a).exp()).inverse(); }

// Gate block of one step (B x 4H, contiguous): sigmoid on i, f, o and
// tanh(x) = 2 sigmoid(2x) - 1 on the candidate.
void activate_gates(double* z, std::size_t batch, std::size_t hs, Eigen::ArrayXd& scratch) {
  const auto n = static_cast<Index>(batch * 4 * hs);
  scratch = Eigen::Map<const Eigen::ArrayXd>(z, n);
  using Rows = Eigen::Map<Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  Rows grid(scratch.data(), static_cast<Index>(batch), static_cast<Index>(4 * hs));
  const auto h = static_cast<Index>(hs);
  grid.rightCols(h) *= 2.0;
  sigmoid_in_scratch(scratch);
  grid.rightCols(h) = 2.0 * grid.rightCols(h) - 1.0;
  Eigen::Map<Eigen::ArrayXd>(z, n) = scratch;
}

// out = tanh(in) over `n` contiguous values.
void tanh_into(const double* in, double* out, std::size_t n, Eigen::ArrayXd& scratch) {
  const auto len = static_cast<Index>(n);
  scratch = 2.0 * Eigen::Map<const Eigen::ArrayXd>(in, len);
  sigmoid_in_scratch(scratch);
  Eigen::Map<Eigen::ArrayXd>(out, len) = 2.0 * scratch - 1.0;
}

LstmTape forward_impl(Matrix inputs, std::size_t batch, std::size_t steps, const Matrix& h0,
                      const Matrix& c0, const LstmParams& p) {
  const std::size_t hs = p.hidden_size;
  LstmTape tape;
  tape.input_size = p.input_size;
  tape.hidden_size = hs;
  tape.batch = batch;
  tape.steps = steps;
  tape.inputs = std::move(inputs);
  tape.prev_hidden = Matrix(steps * batch, hs);
  tape.prev_cell = Matrix(steps * batch, hs);
  tape.gates = Matrix(steps * batch, 4 * hs);
  tape.cell = Matrix(steps * batch, hs);
  tape.tanh_cell = Matrix(steps * batch, hs);

  // Input contributions for all steps in one product.
  auto z = view(tape.gates);
  z.noalias() = view(tape.inputs) * view(p.w).transpose();
  z.rowwise() += view(p.b).row(0);

  step_block(tape.prev_hidden, 0, batch) = view(h0);
  step_block(tape.prev_cell, 0, batch) = view(c0);
  Eigen::ArrayXd scratch;

  for (std::size_t t = 0; t < steps; ++t) {
    auto zt = step_block(tape.gates, t, batch);
    zt.noalias() += step_block(tape.prev_hidden, t, batch) * view(p.u).transpose();
    const auto c_prev = step_block(tape.prev_cell, t, batch);
    auto c_out = step_block(tape.cell, t, batch);
    auto tc_out = step_block(tape.tanh_cell, t, batch);
    const auto h = static_cast<Index>(hs);
    activate_gates(zt.data(), batch, hs, scratch);
    c_out.array() = zt.middleCols(h, h).array() * c_prev.array() +
                    zt.leftCols(h).array() * zt.rightCols(h).array();
    tanh_into(c_out.data(), tc_out.data(), batch * hs, scratch);
    if (t + 1 < steps) {
      auto h_next = step_block(tape.prev_hidden, t + 1, batch);
      const auto gates = step_block(tape.gates, t, batch);
      h_next = gates.middleCols(static_cast<Index>(2 * hs), static_cast<Index>(hs))
                   .cwiseProduct(tc_out);
      step_block(tape.prev_cell, t + 1, batch) = c_out;
    }
  }
  return tape;
}

Matrix final_hidden(const LstmTape& tape) { return tape.hidden_at(tape.steps - 1); }

void check_tape(const LstmTape& tape, const LstmParams& p) {
  if (tape.input_size != p.input_size || tape.hidden_size != p.hidden_size || tape.steps == 0 ||
      tape.gates.rows() != tape.steps * tape.batch) {
    throw StateError("LSTM tape (" + std::to_string(tape.input_size) + "->" +
                     std::to_string(tape.hidden_size) + ", " + std::to_string(tape.steps) +
                     " steps) does not match parameters (" + std::to_string(p.input_size) + "->" +
                     std::to_string(p.hidden_size) + ")");
  }
}

}  // namespace

LstmParams LstmParams::zeros(std::size_t input_size, std::size_t hidden_size) {
  LstmParams p;
  p.input_size = input_size;
  p.hidden_size = hidden_size;
  p.w = Matrix(4 * hidden_size, input_size);
  p.u = Matrix(4 * hidden_size, hidden_size);
  p.b = Matrix(1, 4 * hidden_size);
  return p;
}

LstmParams LstmParams::xavier(std::size_t input_size, std::size_t hidden_size, Rng& rng) {
  if (input_size == 0 || hidden_size == 0) throw ArgumentError("LSTM sizes must be positive");
  LstmParams p = zeros(input_size, hidden_size);
  for (std::size_t gate = 0; gate < 4; ++gate) {
    const Matrix wb = xavier_init(hidden_size, input_size, rng);
    const Matrix ub = xavier_init(hidden_size, hidden_size, rng);
    std::copy_n(wb.data(), wb.size(), p.w.data() + gate * wb.size());
    std::copy_n(ub.data(), ub.size(), p.u.data() + gate * ub.size());
  }
  for (std::size_t j = 0; j < hidden_size; ++j) p.b[p.gate_row(Gate::kForget, j)] = kForgetBiasInit;
  return p;
}

void LstmParams::check() const {
  const std::size_t g = 4 * hidden_size;
  if (w.rows() != g || w.cols() != input_size || u.rows() != g || u.cols() != hidden_size ||
      b.rows() != 1 || b.cols() != g) {
    throw DimensionError("LSTM parameters inconsistent with input " + std::to_string(input_size) +
                         " hidden " + std::to_string(hidden_size) + ": W " + shape_string(w) +
                         " U " + shape_string(u) + " b " + shape_string(b));
  }
}

Matrix LstmTape::hidden_at(std::size_t t) const {
  Matrix h(batch, hidden_size);
  auto out = view(h);
  out = step_block(gates, t, batch)
            .middleCols(static_cast<Index>(2 * hidden_size), static_cast<Index>(hidden_size))
            .cwiseProduct(step_block(tanh_cell, t, batch));
  return h;
}

std::pair<Matrix, Matrix> lstm_cell_forward(const Matrix& x, const Matrix& h, const Matrix& c,
                                            const LstmParams& p) {
  p.check();
  if (x.cols() != p.input_size || h.cols() != p.hidden_size || c.cols() != p.hidden_size ||
      h.rows() != x.rows() || c.rows() != x.rows()) {
    throw DimensionError("lstm_cell_forward: x " + shape_string(x) + ", h " + shape_string(h) +
                         ", c " + shape_string(c) + " for input " + std::to_string(p.input_size) +
                         " hidden " + std::to_string(p.hidden_size));
  }
  LstmTape tape = forward_impl(x, x.rows(), 1, h, c, p);
  return {final_hidden(tape), std::move(tape.cell)};
}

LstmWindowResult lstm_forward_window(std::span<const Matrix> frames, const LstmParams& p) {
  if (frames.empty()) throw ArgumentError("lstm_forward_window: empty window");
  p.check();
  const std::size_t batch = frames.front().rows();
  for (const auto& f : frames) {
    if (f.cols() != p.input_size || f.rows() != batch) {
      throw DimensionError("lstm_forward_window: frame " + shape_string(f) + " for input width " +
                           std::to_string(p.input_size));
    }
  }
  const Matrix zero_state(batch, p.hidden_size);
  LstmWindowResult result;
  result.tape = forward_impl(vconcat(frames), batch, frames.size(), zero_state, zero_state, p);
  result.hidden = final_hidden(result.tape);
  return result;
}

std::vector<Matrix> lstm_backward(const LstmTape& tape, const Matrix& dh_final,
                                  std::span<const Matrix> dh_steps, const LstmParams& p,
                                  LstmParams& grads) {
  check_tape(tape, p);
  const std::size_t hs = p.hidden_size;
  const std::size_t batch = tape.batch;
  const std::size_t steps = tape.steps;
  require_same_shape(grads.w, p.w, "LSTM gradient W");
  require_same_shape(grads.u, p.u, "LSTM gradient U");
  require_same_shape(grads.b, p.b, "LSTM gradient b");
  if (dh_final.rows() != batch || dh_final.cols() != hs) {
    throw DimensionError("lstm_backward: dh " + shape_string(dh_final) + " for batch " +
                         std::to_string(batch) + " hidden " + std::to_string(hs));
  }
  if (!dh_steps.empty() && dh_steps.size() != steps) {
    throw DimensionError("lstm_backward: per-step gradient count differs from tape length");
  }

  Matrix dz(steps * batch, 4 * hs);
  RowMajor dh = view(dh_final);
  RowMajor dc = RowMajor::Zero(static_cast<Index>(batch), static_cast<Index>(hs));
  const auto u = view(p.u);

  for (std::size_t step = steps; step-- > 0;) {
    if (!dh_steps.empty()) {
      if (dh_steps[step].rows() != batch || dh_steps[step].cols() != hs) {
        throw DimensionError("lstm_backward: per-step dh has shape " +
                             shape_string(dh_steps[step]));
      }
      dh += view(dh_steps[step]);
    }
    const auto gates = step_block(tape.gates, step, batch);
    const auto tanh_c = step_block(tape.tanh_cell, step, batch);
    const auto c_prev = step_block(tape.prev_cell, step, batch);
    auto dzt = step_block(dz, step, batch);
    for (Index r = 0; r < static_cast<Index>(batch); ++r) {
      const double* g = gates.row(r).data();
      double* d = dzt.row(r).data();
      for (std::size_t j = 0; j < hs; ++j) {
        const auto jj = static_cast<Index>(j);
        const double i_gate = g[j];
        const double f_gate = g[hs + j];
        const double o_gate = g[2 * hs + j];
        const double cand = g[3 * hs + j];
        const double tc = tanh_c(r, jj);
        const double dh_rj = dh(r, jj);
        const double dc_total = dc(r, jj) + dh_rj * o_gate * (1.0 - tc * tc);
        d[j] = dc_total * cand * i_gate * (1.0 - i_gate);
        d[hs + j] = dc_total * c_prev(r, jj) * f_gate * (1.0 - f_gate);
        d[2 * hs + j] = dh_rj * tc * o_gate * (1.0 - o_gate);
        d[3 * hs + j] = dc_total * i_gate * (1.0 - cand * cand);
        dc(r, jj) = dc_total * f_gate;
      }
    }
    dh.noalias() = dzt * u;
  }

  const auto dz_all = view(dz);
  view(grads.w).noalias() += dz_all.transpose() * view(tape.inputs);
  view(grads.u).noalias() += dz_all.transpose() * view(tape.prev_hidden);
  accumulate_column_sums(dz, grads.b);

  Matrix dx_all(steps * batch, p.input_size);
  view(dx_all).noalias() = dz_all * view(p.w);
  std::vector<Matrix> dx;
  dx.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) dx.push_back(slice_rows(dx_all, t * batch, batch));
  return dx;
}

LstmGradients lstm_backward_window(const LstmTape& tape, const Matrix& dh, const LstmParams& p) {
  LstmGradients out;
  out.params = LstmParams::zeros(p.input_size, p.hidden_size);
  out.input = lstm_backward(tape, dh, {}, p, out.params);
  return out;
}

Matrix dropout(const Matrix& v, double rate, Rng& rng, bool training, Matrix* mask) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ArgumentError("dropout rate " + std::to_string(rate) + " outside [0, 1)");
  }
  if (!training || rate == 0.0) {
    if (mask != nullptr) *mask = Matrix(v.rows(), v.cols(), 1.0);
    return v;
  }
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix out(v.rows(), v.cols());
  Matrix local_mask;
  Matrix& m = mask != nullptr ? *mask : local_mask;
  m = Matrix(v.rows(), v.cols());
  for (std::size_t i = 0; i < v.size(); ++i) {
    m[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    out[i] = v[i] * m[i];
  }
  return out;
}

}  // namespace gesturefx
