#include "gesturefx/training.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "gesturefx/adam.hpp"
#include "gesturefx/error.hpp"
#include "gesturefx/nn_ops.hpp"

namespace gesturefx {
namespace {

void shuffle_in_place(std::vector<std::size_t>& order, Rng& rng) {
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
}

void zero(Model& grads) {
  for (Matrix* t : grads.tensors()) t->fill(0.0);
}

void require_labels_in_range(const Dataset& d, std::size_t classes) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.labels[i] >= classes) {
      throw DataError("sample " + (i < d.ids.size() ? d.ids[i] : std::to_string(i)) +
                      " has label outside the model's classes");
    }
  }
}

}  // namespace

Dataset make_dataset(const std::vector<SkeletonSequence>& seqs) {
  Dataset d;
  d.inputs.reserve(seqs.size());
  for (const auto& s : seqs) {
    if (!s.label) throw DataError("sequence '" + s.id + "' has no label");
    if (!is_model_ready(s)) {
      throw PreconditionError("sequence '" + s.id + "' is not model-ready (needs 24 frames, " +
                              "no missing joints; has " + std::to_string(s.frames.size()) +
                              " frames, " + std::to_string(s.missing_count()) + " missing)");
    }
    d.inputs.push_back(to_tensor(s));
    d.labels.push_back(*s.label);
    d.ids.push_back(s.id);
  }
  return d;
}

Dataset prepare_dataset(const std::vector<SkeletonSequence>& seqs) {
  std::vector<SkeletonSequence> ready;
  ready.reserve(seqs.size());
  for (const auto& s : seqs) ready.push_back(prepare_for_model(s));
  return make_dataset(ready);
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction,
                                          std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ArgumentError("split fraction must lie in (0, 1)");
  Rng rng(seed);
  std::pair<Dataset, Dataset> out;
  std::size_t max_label = 0;
  for (std::size_t l : data.labels) max_label = std::max(max_label, l);
  for (std::size_t c = 0; c <= max_label; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.labels[i] == c) members.push_back(i);
    }
    Rng stream = rng.split(c);
    shuffle_in_place(members, stream);
    const auto held = static_cast<std::size_t>(
        std::lround(fraction * static_cast<double>(members.size())));
    std::sort(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(members.size() - held));
    std::sort(members.begin() + static_cast<std::ptrdiff_t>(members.size() - held), members.end());
    for (std::size_t k = 0; k < members.size(); ++k) {
      Dataset& target = k < members.size() - held ? out.first : out.second;
      const std::size_t i = members[k];
      target.inputs.push_back(data.inputs[i]);
      target.labels.push_back(data.labels[i]);
      if (i < data.ids.size()) target.ids.push_back(data.ids[i]);
    }
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
  if (batch_size == 0) throw ArgumentError("batch size must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ArgumentError("dropout must lie in [0, 1)");
  if (threads == 0) throw ArgumentError("threads must be >= 1");
}

TrainResult train(const Model& initial, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  initial.check();
  TrainResult result{initial, {}};
  result.model.spec.dropout = cfg.dropout;
  if (cfg.max_epochs == 0) return result;
  if (train_set.empty()) throw ArgumentError("training set is empty");
  require_labels_in_range(train_set, initial.spec.class_count());
  for (const auto& x : train_set.inputs) {
    if (x.rows() != initial.spec.seq_len || x.cols() != initial.spec.input_size) {
      throw PreconditionError("training sample of shape " + shape_string(x) +
                              " is not model-ready");
    }
  }

  Model& model = result.model;
  Model grads = Model::zeros_like(model);
  auto params = model.tensors();
  auto grad_ptrs = grads.tensors();
  std::vector<const Matrix*> grad_view(grad_ptrs.begin(), grad_ptrs.end());
  std::vector<const Matrix*> param_view(params.begin(), params.end());
  AdamState adam({.learning_rate = cfg.learning_rate}, param_view);

  const Rng root(cfg.seed);
  Rng shuffle_rng = root.split("shuffle");
  Rng dropout_rng = root.split("dropout");

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  Model best = model;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  const bool has_val = !val_set.empty();

  std::vector<Matrix> batch_inputs;
  std::vector<std::size_t> batch_labels;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (cfg.shuffle) shuffle_in_place(order, shuffle_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - first);
      batch_inputs.clear();
      batch_labels.clear();
      for (std::size_t k = 0; k < n; ++k) {
        batch_inputs.push_back(train_set.inputs[order[first + k]]);
        batch_labels.push_back(train_set.labels[order[first + k]]);
      }
      const auto frames = batch_frames(batch_inputs, model.spec.seq_len, model.spec.input_size);
      const auto tape =
          model_forward(frames, model, dropout_rng, {.training = true, .threads = cfg.threads});
      zero(grads);
      const double loss = model_backward(tape, batch_labels, model, grads, cfg.threads);
      for (const Matrix* g : grad_view) {
        if (!g->all_finite()) throw StateError("non-finite gradient at epoch " + std::to_string(epoch));
      }
      adam_step(params, grad_view, adam);
      loss_sum += loss * static_cast<double>(n);
      for (std::size_t b = 0; b < n; ++b) {
        correct += argmax(tape.probabilities.row(b)).label == batch_labels[b] ? 1 : 0;
      }
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(train_set.size());
    m.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
    if (has_val) {
      const auto report = evaluate(model, val_set, cfg.threads);
      m.val_loss = report.mean_loss;
      m.val_accuracy = report.accuracy;
    }
    result.history.epochs.push_back(m);

    bool stop = false;
    if (has_val) {
      if (*m.val_loss < best_val) {
        best_val = *m.val_loss;
        best = model;
        result.history.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        result.history.early_stopped = true;
        stop = true;
      }
    } else {
      result.history.best_epoch = epoch;
    }
    if (on_epoch && !on_epoch(m, model)) stop = true;
    if (stop) break;
  }
  if (has_val && result.history.best_epoch > 0) model = std::move(best);
  return result;
}

EvalReport evaluate(const Model& model, const Dataset& data, std::size_t threads) {
  if (data.empty()) throw ArgumentError("cannot evaluate on an empty set");
  require_labels_in_range(data, model.spec.class_count());
  EvalReport report;
  report.count = data.size();
  constexpr std::size_t kChunk = 64;
  Rng unused(0);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t first = 0; first < data.size(); first += kChunk) {
    const std::size_t n = std::min(kChunk, data.size() - first);
    const auto frames = batch_frames(std::span(data.inputs).subspan(first, n), model.spec.seq_len,
                                     model.spec.input_size);
    const auto tape = model_forward(frames, model, unused, {.training = false, .threads = threads});
    for (std::size_t b = 0; b < n; ++b) {
      const auto probs = tape.probabilities.row(b);
      const std::size_t truth = data.labels[first + b];
      const std::size_t pred = argmax(probs).label;
      loss += cross_entropy(probs, truth);
      correct += pred == truth ? 1 : 0;
      ++report.confusion[truth][pred];
    }
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  report.mean_loss = loss / static_cast<double>(data.size());
  return report;
}

void write_history_jsonl(std::ostream& out, const TrainHistory& history) {
  for (const auto& e : history.epochs) {
    nlohmann::json j;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    j["train_accuracy"] = e.train_accuracy;
    j["val_loss"] = e.val_loss ? nlohmann::json(*e.val_loss) : nlohmann::json(nullptr);
    j["val_accuracy"] = e.val_accuracy ? nlohmann::json(*e.val_accuracy) : nlohmann::json(nullptr);
    j["best"] = e.epoch == history.best_epoch;
    out << j.dump() << '\n';
  }
}

ReferenceResult reference_result(Variant v) {
  switch (v) {
    case Variant::kItsLstm:
      return {95.30, 0.0748};
    case Variant::kTsLstmWithOriginal:
      return {94.80, 0.0472};
    case Variant::kTsLstmWithoutOriginal:
      return {94.36, 0.1142};
    case Variant::kDoubleLstm:
      return {93.12, 0.0920};
    case Variant::kSingleLstm:
      return {94.09, 0.0682};
  }
  return {0.0, 0.0};
}

const VariantSummary& ComparisonTable::row(Variant v) const {
  for (const auto& r : rows) {
    if (r.variant == v) return r;
  }
  throw ArgumentError("comparison has no row for " + std::string(variant_name(v)));
}

ComparisonTable compare_models(const CompareInput& data, const TrainConfig& cfg,
                               std::span<const std::uint64_t> seeds,
                               std::span<const Variant> variants,
                               const CompareProgress& progress) {
  if (seeds.empty()) throw ArgumentError("compare_models needs at least one seed");
  ComparisonTable table;
  table.seeds.assign(seeds.begin(), seeds.end());
  for (Variant v : variants) {
    VariantSummary row;
    row.variant = v;
    row.reference = reference_result(v);
    for (std::uint64_t seed : seeds) {
      Rng init(seed);
      const Model model = Model::build(model_spec(v), init);
      TrainConfig run = cfg;
      run.seed = seed;
      const auto trained = train(model, data.train, data.validation, run);
      const auto report = evaluate(trained.model, data.test, cfg.threads);
      row.accuracy.push_back(report.accuracy);
      row.loss.push_back(report.mean_loss);
      row.epochs_trained.push_back(trained.history.epochs.size());
      if (progress) progress(v, seed, report);
    }
    const auto n = static_cast<double>(seeds.size());
    row.mean_accuracy = std::accumulate(row.accuracy.begin(), row.accuracy.end(), 0.0) / n;
    row.mean_loss = std::accumulate(row.loss.begin(), row.loss.end(), 0.0) / n;
    const auto [amin, amax] = std::minmax_element(row.accuracy.begin(), row.accuracy.end());
    const auto [lmin, lmax] = std::minmax_element(row.loss.begin(), row.loss.end());
    row.min_accuracy = *amin;
    row.max_accuracy = *amax;
    row.min_loss = *lmin;
    row.max_loss = *lmax;
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_comparison(const ComparisonTable& table) {
  std::ostringstream os;
  os << std::fixed;
  os << std::left << std::setw(18) << "variant" << std::right << std::setw(22) << "acc % (min..max)"
     << std::setw(26) << "loss (min..max)" << std::setw(22) << "reference acc/loss*" << '\n';
  for (const auto& r : table.rows) {
    std::ostringstream acc;
    acc << std::fixed << std::setprecision(2) << 100.0 * r.mean_accuracy << " ("
        << 100.0 * r.min_accuracy << ".." << 100.0 * r.max_accuracy << ")";
    std::ostringstream loss;
    loss << std::fixed << std::setprecision(4) << r.mean_loss << " (" << r.min_loss << ".."
         << r.max_loss << ")";
    std::ostringstream ref;
    ref << std::fixed << std::setprecision(2) << r.reference.accuracy_percent << " / "
        << std::setprecision(4) << r.reference.loss;
    os << std::left << std::setw(18) << variant_name(r.variant) << std::right << std::setw(22)
       << acc.str() << std::setw(26) << loss.str() << std::setw(22) << ref.str() << '\n';
  }
  os << "* reference values come from a private data set and are not reproducible here\n";
  return os.str();
}

void write_comparison_json(std::ostream& out, const ComparisonTable& table) {
  nlohmann::json doc;
  doc["seeds"] = table.seeds;
  doc["rows"] = nlohmann::json::array();
  for (const auto& r : table.rows) {
    nlohmann::json row;
    row["variant"] = variant_name(r.variant);
    row["accuracy"] = r.accuracy;
    row["loss"] = r.loss;
    row["epochs_trained"] = r.epochs_trained;
    row["mean_accuracy"] = r.mean_accuracy;
    row["min_accuracy"] = r.min_accuracy;
    row["max_accuracy"] = r.max_accuracy;
    row["mean_loss"] = r.mean_loss;
    row["min_loss"] = r.min_loss;
    row["max_loss"] = r.max_loss;
    row["reference"] = {{"accuracy_percent", r.reference.accuracy_percent},
                        {"loss", r.reference.loss},
                        {"reproducible", false}};
    doc["rows"].push_back(std::move(row));
  }
  out << doc.dump(2) << '\n';
}

}  // namespace gesturefx
