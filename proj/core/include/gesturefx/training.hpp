#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gesturefx/matrix.hpp"
#include "gesturefx/model.hpp"
#include "gesturefx/skeleton.hpp"

namespace gesturefx {

// Model-ready tensors with their labels.
struct Dataset {
  std::vector<Matrix> inputs;  // 24 x 36 each
  std::vector<std::size_t> labels;
  std::vector<std::string> ids;

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }
};

// Throws DataError for unlabeled sequences and PreconditionError for
// sequences that are not model-ready.
Dataset make_dataset(const std::vector<SkeletonSequence>& seqs);
// prepare_for_model on each sequence, then make_dataset.
Dataset prepare_dataset(const std::vector<SkeletonSequence>& seqs);

// Stratified split: roughly `fraction` of every class goes to the second set.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction,
                                          std::uint64_t seed);

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;  // epochs without validation improvement
  double dropout = kDefaultDropout;
  std::uint64_t seed = 1;
  bool shuffle = true;
  std::size_t threads = 1;

  void validate() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;  // training-mode predictions seen during the epoch
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct TrainHistory {
  std::vector<EpochMetrics> epochs;
  std::size_t best_epoch = 0;  // 0 when the returned model is the initial one
  bool early_stopped = false;

  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct TrainResult {
  Model model;
  TrainHistory history;
};

// Called after every epoch; return false to stop training.
using EpochCallback = std::function<bool(const EpochMetrics&, const Model&)>;

// Adam over shuffled minibatches with batch-averaged cross-entropy. With a
// validation set the parameters of the best validation-loss epoch are
// returned and training stops after `patience` epochs without improvement.
TrainResult train(const Model& initial, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

struct EvalReport {
  double accuracy = 0.0;
  double mean_loss = 0.0;  // nats
  std::array<std::array<std::size_t, kClassCount>, kClassCount> confusion{};  // [truth][pred]
  std::size_t count = 0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

EvalReport evaluate(const Model& model, const Dataset& data, std::size_t threads = 1);

// One JSON object per epoch.
void write_history_jsonl(std::ostream& out, const TrainHistory& history);

// Reference values from the original experiment; the data set behind them is
// private, so they are carried as metadata and never asserted.
struct ReferenceResult {
  double accuracy_percent;
  double loss;
};
ReferenceResult reference_result(Variant v);

struct VariantSummary {
  Variant variant = Variant::kItsLstm;
  std::vector<double> accuracy;  // per seed
  std::vector<double> loss;      // per seed
  std::vector<std::size_t> epochs_trained;
  double mean_accuracy = 0.0;
  double min_accuracy = 0.0;
  double max_accuracy = 0.0;
  double mean_loss = 0.0;
  double min_loss = 0.0;
  double max_loss = 0.0;
  ReferenceResult reference{};
};

struct ComparisonTable {
  std::vector<std::uint64_t> seeds;
  std::vector<VariantSummary> rows;

  const VariantSummary& row(Variant v) const;
};

struct CompareInput {
  Dataset train;
  Dataset validation;
  Dataset test;
};

using CompareProgress = std::function<void(Variant, std::uint64_t seed, const EvalReport&)>;

// Trains each variant once per seed on the same data and evaluates it on the
// test set. The seed drives both initialization and training.
ComparisonTable compare_models(const CompareInput& data, const TrainConfig& cfg,
                               std::span<const std::uint64_t> seeds,
                               std::span<const Variant> variants = kAllVariants,
                               const CompareProgress& progress = {});

std::string format_comparison(const ComparisonTable& table);
void write_comparison_json(std::ostream& out, const ComparisonTable& table);

}  // namespace gesturefx
