#include "gesturefx/model.hpp"

#include <algorithm>
#include <string>

#include "gesturefx/error.hpp"
#include "gesturefx/lstm.hpp"
#include "gesturefx/nn_ops.hpp"
#include "gesturefx/parallel.hpp"

namespace gesturefx {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kItsLstm:
      return "its-lstm";
    case Variant::kTsLstmWithOriginal:
      return "ts-lstm";
    case Variant::kTsLstmWithoutOriginal:
      return "ts-lstm-no-orig";
    case Variant::kSingleLstm:
      return "single";
    case Variant::kDoubleLstm:
      return "double";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "its-lstm" || name == "its") return Variant::kItsLstm;
  if (name == "ts-lstm" || name == "ts-lstm-with-original") return Variant::kTsLstmWithOriginal;
  if (name == "ts-lstm-no-orig" || name == "ts-lstm-without-original") {
    return Variant::kTsLstmWithoutOriginal;
  }
  if (name == "single" || name == "single-lstm") return Variant::kSingleLstm;
  if (name == "double" || name == "double-lstm") return Variant::kDoubleLstm;
  throw ArgumentError("unknown model variant '" + std::string(name) + "'");
}

ModelGroup network_group(std::size_t table_row) {
  switch (table_row) {
    case 0:
    case 1:
      return ModelGroup::kShortTerm;
    case 2:
    case 6:
      return ModelGroup::kMediumTerm;
    case 3:
    case 4:
    case 5:
      return ModelGroup::kOriginal;
    default:
      throw ArgumentError("network index " + std::to_string(table_row) + " outside 0..6");
  }
}

std::array<TsLstmConfig, kNetworkCount> ensemble_configs() {
  // hidden, delay, window, stride, projection
  return {{
      {256, 1, 5, 5, 128},
      {256, 1, 11, 11, 64},
      {256, 5, 9, 9, std::nullopt},
      {256, 1, 23, std::nullopt, 32},
      {256, 5, 19, std::nullopt, std::nullopt},
      {256, 10, 14, std::nullopt, std::nullopt},
      {256, 0, 12, 12, 64},
  }};
}

std::size_t ModelSpec::concat_width() const {
  std::size_t w = 0;
  for (const auto& n : networks) w += n.output_width();
  return w;
}

void ModelSpec::validate() const {
  if (networks.empty()) throw ConfigError("model has no recurrent networks");
  if (network_rows.size() != networks.size()) {
    throw ConfigError("network row tags do not match network count");
  }
  if (head_widths.empty() || head_widths.size() != head_dropout.size()) {
    throw ConfigError("head layer description is inconsistent");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  for (const auto& n : networks) n.validate(seq_len);
  for (std::size_t w : head_widths) {
    if (w == 0) throw ConfigError("head layer width must be >= 1");
  }
}

ModelSpec model_spec(Variant variant, std::size_t hidden_size, std::size_t projection_divisor) {
  if (hidden_size == 0 || projection_divisor == 0) {
    throw ArgumentError("model_spec: sizes must be positive");
  }
  ModelSpec spec;
  spec.variant = variant;
  const auto table = ensemble_configs();
  auto add_table_row = [&](std::size_t row) {
    TsLstmConfig cfg = table[row];
    cfg.hidden_size = hidden_size;
    if (cfg.projection) cfg.projection = std::max<std::size_t>(1, *cfg.projection / projection_divisor);
    spec.networks.push_back(cfg);
    spec.network_rows.emplace_back(row);
  };
  switch (variant) {
    case Variant::kItsLstm:
      for (std::size_t r = 0; r < kNetworkCount; ++r) add_table_row(r);
      spec.head_widths = {72, 18, kClassCount};
      spec.head_dropout = {true, true, false};
      break;
    case Variant::kTsLstmWithOriginal:
      for (std::size_t r = 0; r < kNetworkCount; ++r) add_table_row(r);
      spec.head_widths = {kClassCount};
      spec.head_dropout = {true};
      break;
    case Variant::kTsLstmWithoutOriginal:
      for (std::size_t r = 0; r < kNetworkCount; ++r) {
        if (network_group(r) != ModelGroup::kOriginal) add_table_row(r);
      }
      spec.head_widths = {kClassCount};
      spec.head_dropout = {true};
      break;
    case Variant::kSingleLstm:
    case Variant::kDoubleLstm: {
      TsLstmConfig whole{hidden_size, 0, kSequenceLength, std::nullopt, std::nullopt};
      whole.layers = variant == Variant::kDoubleLstm ? 2 : 1;
      spec.networks.push_back(whole);
      spec.network_rows.emplace_back(std::nullopt);
      spec.head_widths = {kClassCount};
      spec.head_dropout = {true};
      break;
    }
  }
  return spec;
}

Model Model::build(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  Model m;
  m.spec = spec;
  m.seed = rng.seed();
  for (std::size_t k = 0; k < spec.networks.size(); ++k) {
    Rng child = rng.split("network/" + std::to_string(k));
    m.networks.push_back(TsLstmNetwork::build(spec.networks[k], spec.input_size, child));
  }
  Rng head_rng = rng.split("head");
  std::size_t in = spec.concat_width();
  for (std::size_t out : spec.head_widths) {
    m.head_w.push_back(xavier_init(out, in, head_rng));
    m.head_b.emplace_back(1, out);
    in = out;
  }
  return m;
}

Model Model::zeros_like(const Model& src) {
  Model m;
  m.spec = src.spec;
  m.seed = src.seed;
  for (const auto& n : src.networks) m.networks.push_back(TsLstmNetwork::zeros_like(n));
  for (const auto& w : src.head_w) m.head_w.push_back(Matrix::zeros_like(w));
  for (const auto& b : src.head_b) m.head_b.push_back(Matrix::zeros_like(b));
  return m;
}

std::vector<Matrix*> Model::tensors() {
  std::vector<Matrix*> out;
  for (auto& n : networks) {
    auto t = n.tensors();
    out.insert(out.end(), t.begin(), t.end());
  }
  for (std::size_t k = 0; k < head_w.size(); ++k) {
    out.push_back(&head_w[k]);
    out.push_back(&head_b[k]);
  }
  return out;
}

std::vector<const Matrix*> Model::tensors() const {
  std::vector<const Matrix*> out;
  for (const auto& n : networks) {
    auto t = n.tensors();
    out.insert(out.end(), t.begin(), t.end());
  }
  for (std::size_t k = 0; k < head_w.size(); ++k) {
    out.push_back(&head_w[k]);
    out.push_back(&head_b[k]);
  }
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const Matrix* t : tensors()) n += t->size();
  return n;
}

void Model::check() const {
  spec.validate();
  if (networks.size() != spec.networks.size()) {
    throw DimensionError("model has " + std::to_string(networks.size()) + " networks, spec " +
                         std::to_string(spec.networks.size()));
  }
  for (std::size_t k = 0; k < networks.size(); ++k) {
    if (!(networks[k].config == spec.networks[k]) || networks[k].input_size != spec.input_size) {
      throw DimensionError("network " + std::to_string(k) + " disagrees with model spec");
    }
    networks[k].check();
  }
  if (head_w.size() != spec.head_widths.size() || head_b.size() != spec.head_widths.size()) {
    throw DimensionError("head layer count disagrees with model spec");
  }
  std::size_t in = spec.concat_width();
  for (std::size_t k = 0; k < head_w.size(); ++k) {
    const std::size_t out = spec.head_widths[k];
    if (head_w[k].rows() != out || head_w[k].cols() != in || head_b[k].rows() != 1 ||
        head_b[k].cols() != out) {
      throw DimensionError("head layer " + std::to_string(k) + " has W " +
                           shape_string(head_w[k]) + ", expected " + std::to_string(out) + "x" +
                           std::to_string(in));
    }
    in = out;
  }
}

Model build_ensemble(Rng& rng) { return Model::build(model_spec(Variant::kItsLstm), rng); }

Model build_baseline(Variant variant, Rng& rng) {
  if (variant == Variant::kItsLstm) {
    throw ArgumentError("its-lstm is the ensemble, not a baseline variant");
  }
  return Model::build(model_spec(variant), rng);
}

std::vector<Matrix> batch_frames(std::span<const Matrix> samples, std::size_t seq_len,
                                 std::size_t input_size) {
  if (samples.empty()) throw ArgumentError("batch_frames: empty batch");
  std::vector<Matrix> frames(seq_len, Matrix(samples.size(), input_size));
  for (std::size_t b = 0; b < samples.size(); ++b) {
    const Matrix& s = samples[b];
    if (s.rows() != seq_len || s.cols() != input_size) {
      throw DimensionError("sample " + std::to_string(b) + " is " + shape_string(s) +
                           ", model expects " + std::to_string(seq_len) + "x" +
                           std::to_string(input_size));
    }
    for (std::size_t t = 0; t < seq_len; ++t) {
      std::copy_n(s.data() + t * input_size, input_size, frames[t].data() + b * input_size);
    }
  }
  return frames;
}

ModelTape model_forward(std::span<const Matrix> frames, const Model& model, Rng& rng,
                        ForwardOptions opts) {
  const auto& spec = model.spec;
  if (frames.size() != spec.seq_len) {
    throw DimensionError("model expects " + std::to_string(spec.seq_len) + " frames, got " +
                         std::to_string(frames.size()));
  }
  for (const auto& f : frames) {
    if (f.cols() != spec.input_size || f.rows() != frames.front().rows()) {
      throw DimensionError("frame " + shape_string(f) + " does not match input width " +
                           std::to_string(spec.input_size));
    }
  }
  ModelTape tape;
  tape.batch = frames.front().rows();

  std::vector<TsLstmForward> results(model.networks.size());
  parallel_for(model.networks.size(), opts.threads,
               [&](std::size_t k) { results[k] = ts_lstm_forward(frames, model.networks[k]); });
  std::vector<Matrix> features;
  features.reserve(results.size());
  for (auto& r : results) {
    features.push_back(std::move(r.feature));
    tape.networks.push_back(std::move(r.tape));
  }

  Matrix x = hconcat(features);
  const std::size_t layers = model.head_w.size();
  for (std::size_t k = 0; k < layers; ++k) {
    Matrix mask;
    if (spec.head_dropout[k] && opts.training && spec.dropout > 0.0) {
      x = dropout(x, spec.dropout, rng, true, &mask);
    }
    tape.masks.push_back(std::move(mask));
    Matrix z;
    gemm(1.0, x, Trans::kNo, model.head_w[k], Trans::kYes, 0.0, z);
    add_row_broadcast(z, model.head_b[k]);
    tape.head_inputs.push_back(std::move(x));
    if (k + 1 < layers) {
      x = z;
      for (double& v : x.values()) v = v > 0.0 ? v : 0.0;
      tape.pre_activations.push_back(std::move(z));
    } else {
      tape.probabilities = softmax_rows(z);
    }
  }
  return tape;
}

std::vector<double> ensemble_forward(const Matrix& sample, const Model& model, Rng& rng,
                                     bool training) {
  const auto frames = batch_frames(std::span(&sample, 1), model.spec.seq_len,
                                   model.spec.input_size);
  const auto tape = model_forward(frames, model, rng, {.training = training});
  const auto row = tape.probabilities.row(0);
  return {row.begin(), row.end()};
}

void networks_backward(const ModelTape& tape, const Matrix& dconcat, const Model& model,
                       Model& grads, std::size_t threads) {
  if (tape.networks.size() != model.networks.size() ||
      grads.networks.size() != model.networks.size()) {
    throw StateError("model tape or gradients do not match the model");
  }
  if (dconcat.rows() != tape.batch || dconcat.cols() != model.spec.concat_width()) {
    throw DimensionError("concat gradient " + shape_string(dconcat) + " does not match width " +
                         std::to_string(model.spec.concat_width()));
  }
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& n : model.networks) {
    offsets.push_back(offset);
    offset += n.output_width();
  }
  parallel_for(model.networks.size(), threads, [&](std::size_t k) {
    const Matrix slice = slice_cols(dconcat, offsets[k], model.networks[k].output_width());
    ts_lstm_backward(tape.networks[k], slice, model.networks[k], grads.networks[k]);
  });
}

double model_backward(const ModelTape& tape, std::span<const std::size_t> labels,
                      const Model& model, Model& grads, std::size_t threads) {
  const std::size_t batch = tape.batch;
  const std::size_t layers = model.head_w.size();
  if (labels.size() != batch) {
    throw DimensionError("got " + std::to_string(labels.size()) + " labels for batch of " +
                         std::to_string(batch));
  }
  if (tape.head_inputs.size() != layers || tape.probabilities.rows() != batch ||
      grads.head_w.size() != layers) {
    throw StateError("model tape does not match the model");
  }
  const std::size_t classes = model.spec.class_count();
  const double scale = 1.0 / static_cast<double>(batch);
  double loss = 0.0;
  Matrix dz = tape.probabilities;
  for (std::size_t b = 0; b < batch; ++b) {
    if (labels[b] >= classes) {
      throw ArgumentError("label " + std::to_string(labels[b]) + " outside class range");
    }
    loss += cross_entropy(tape.probabilities.row(b), labels[b]);
    dz(b, labels[b]) -= 1.0;
  }
  dz *= scale;

  for (std::size_t k = layers; k-- > 0;) {
    gemm(1.0, dz, Trans::kYes, tape.head_inputs[k], Trans::kNo, 1.0, grads.head_w[k]);
    accumulate_column_sums(dz, grads.head_b[k]);
    Matrix dx;
    gemm(1.0, dz, Trans::kNo, model.head_w[k], Trans::kNo, 0.0, dx);
    if (!tape.masks[k].empty()) {
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= tape.masks[k][i];
    }
    if (k > 0) {
      const Matrix& pre = tape.pre_activations[k - 1];
      for (std::size_t i = 0; i < dx.size(); ++i) {
        if (!(pre[i] > 0.0)) dx[i] = 0.0;
      }
    }
    dz = std::move(dx);
  }
  networks_backward(tape, dz, model, grads, threads);
  return loss * scale;
}

Prediction argmax(std::span<const double> probs) {
  if (probs.empty()) throw ArgumentError("argmax of an empty distribution");
  const auto it = std::max_element(probs.begin(), probs.end());
  return {static_cast<std::size_t>(it - probs.begin()), *it};
}

Prediction predict(const Matrix& sample, const Model& model) {
  Rng unused(0);
  return argmax(ensemble_forward(sample, model, unused, false));
}

std::vector<Prediction> predict_batch(std::span<const Matrix> samples, const Model& model,
                                      std::size_t threads) {
  std::vector<Prediction> out;
  out.reserve(samples.size());
  constexpr std::size_t kChunk = 64;
  Rng unused(0);
  for (std::size_t first = 0; first < samples.size(); first += kChunk) {
    const std::size_t n = std::min(kChunk, samples.size() - first);
    const auto frames = batch_frames(samples.subspan(first, n), model.spec.seq_len,
                                     model.spec.input_size);
    const auto tape = model_forward(frames, model, unused, {.training = false, .threads = threads});
    for (std::size_t b = 0; b < n; ++b) out.push_back(argmax(tape.probabilities.row(b)));
  }
  return out;
}

}  // namespace gesturefx
