#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gesturefx/matrix.hpp"
#include "gesturefx/rng.hpp"
#include "gesturefx/ts_lstm.hpp"

namespace gesturefx {

inline constexpr std::size_t kSequenceLength = 24;
inline constexpr std::size_t kFrameWidth = 36;  // 18 joints x (x, y)
inline constexpr std::size_t kClassCount = 4;
inline constexpr std::size_t kNetworkCount = 7;
inline constexpr double kDefaultDropout = 0.2;

// iTS-LSTM and the four comparison architectures.
enum class Variant {
  kItsLstm,               // 7 networks -> fc1(72) -> fc2(18) -> 4-way softmax
  kTsLstmWithOriginal,    // 7 networks -> 4-way softmax
  kTsLstmWithoutOriginal, // networks {0,1,2,6} -> 4-way softmax
  kSingleLstm,            // one LSTM over all 24 frames -> 4-way softmax
  kDoubleLstm,            // two stacked LSTMs over all 24 frames -> 4-way softmax
};

inline constexpr std::array<Variant, 5> kAllVariants = {
    Variant::kItsLstm, Variant::kTsLstmWithOriginal, Variant::kTsLstmWithoutOriginal,
    Variant::kSingleLstm, Variant::kDoubleLstm};

// CLI spelling: its-lstm, ts-lstm, ts-lstm-no-orig, single, double.
std::string_view variant_name(Variant v);
// Accepts the CLI spelling and the long names (single-lstm, double-lstm,
// ts-lstm-with-original, ts-lstm-without-original). Throws ArgumentError.
Variant parse_variant(std::string_view name);

// Temporal grouping of the seven ensemble networks. Networks without a sliding
// stride have their single window end at the last frame and form the
// "original" group.
enum class ModelGroup { kShortTerm, kMediumTerm, kOriginal };
ModelGroup network_group(std::size_t table_row);

// The seven rows of the parameter table, in order.
std::array<TsLstmConfig, kNetworkCount> ensemble_configs();

// Structural description of a model; everything a checkpoint needs besides
// the tensors.
struct ModelSpec {
  Variant variant = Variant::kItsLstm;
  std::size_t seq_len = kSequenceLength;
  std::size_t input_size = kFrameWidth;
  std::vector<TsLstmConfig> networks;
  // Ensemble row of each network; empty optional for the plain LSTM baselines.
  std::vector<std::optional<std::size_t>> network_rows;
  // Output width of each affine head layer; the last entry is the class count.
  std::vector<std::size_t> head_widths;
  // Whether dropout is applied to the input of each head layer.
  std::vector<bool> head_dropout;
  double dropout = kDefaultDropout;

  std::size_t concat_width() const;
  std::size_t class_count() const { return head_widths.back(); }
  void validate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Full-size spec for a variant. `hidden_size` and `projection_divisor` exist
// for reduced clones (gradient checking); defaults give the real model.
ModelSpec model_spec(Variant variant, std::size_t hidden_size = 256,
                     std::size_t projection_divisor = 1);

struct Model {
  ModelSpec spec;
  std::vector<TsLstmNetwork> networks;
  std::vector<Matrix> head_w;  // out x in per layer
  std::vector<Matrix> head_b;  // 1 x out per layer
  std::uint64_t seed = 0;      // seed of the initializing stream, kept for provenance

  static Model build(const ModelSpec& spec, Rng& rng);
  static Model zeros_like(const Model& m);

  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  std::size_t parameter_count() const;
  void check() const;

  friend bool operator==(const Model&, const Model&) = default;
};

Model build_ensemble(Rng& rng);
Model build_baseline(Variant variant, Rng& rng);

struct ModelTape {
  std::size_t batch = 0;
  std::vector<TsLstmTape> networks;
  std::vector<Matrix> head_inputs;  // post-dropout input of each head layer
  std::vector<Matrix> masks;        // dropout factors (empty if no dropout on that layer)
  std::vector<Matrix> pre_activations;  // affine outputs feeding a ReLU
  Matrix probabilities;                 // B x classes
};

struct ForwardOptions {
  bool training = false;
  std::size_t threads = 1;
};

// Regroups B samples (each seq_len x input_size) into seq_len frame matrices
// of shape B x input_size.
std::vector<Matrix> batch_frames(std::span<const Matrix> samples, std::size_t seq_len,
                                 std::size_t input_size);

// Batched forward. `rng` is only consumed when training with dropout > 0.
ModelTape model_forward(std::span<const Matrix> frames, const Model& model, Rng& rng,
                        ForwardOptions opts = {});

// Probability row for a single 24x36 sample.
std::vector<double> ensemble_forward(const Matrix& sample, const Model& model, Rng& rng,
                                     bool training = false);

// Mean cross-entropy over the batch and its gradient, accumulated into `grads`
// (shaped like `model`). Returns the mean loss.
double model_backward(const ModelTape& tape, std::span<const std::size_t> labels,
                      const Model& model, Model& grads, std::size_t threads = 1);

// Gradient of an arbitrary upstream signal on the concatenated feature; used
// to test that each network only sees its own slice.
void networks_backward(const ModelTape& tape, const Matrix& dconcat, const Model& model,
                       Model& grads, std::size_t threads = 1);

struct Prediction {
  std::size_t label = 0;
  double confidence = 0.0;
};

// Inference-mode argmax; ties resolve to the lowest class index.
Prediction predict(const Matrix& sample, const Model& model);
std::vector<Prediction> predict_batch(std::span<const Matrix> samples, const Model& model,
                                      std::size_t threads = 1);
Prediction argmax(std::span<const double> probs);

}  // namespace gesturefx
