// gesturefx command line: corpus synthesis, stabilization, training,
// evaluation, comparison, gradient checking, prediction and timelines.
//
// Exit codes: 0 success, 1 usage error, 2 data or model error.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gesturefx/checkpoint.hpp"
#include "gesturefx/error.hpp"
#include "gesturefx/gradcheck.hpp"
#include "gesturefx/stabilizer.hpp"
#include "gesturefx/synth.hpp"
#include "gesturefx/timeline.hpp"
#include "gesturefx/training.hpp"

namespace gfx = gesturefx;
using nlohmann::json;

namespace {

constexpr int kUsageExit = 1;
constexpr int kErrorExit = 2;

const std::vector<std::string> kCommands = {"synth", "stabilize", "train",   "eval",
                                            "compare", "gradcheck", "predict", "timeline"};

// --- config file -------------------------------------------------------------

// The config file is a flat JSON object keyed by long option names, the same
// shape the effective-config echo prints. Its entries become arguments placed
// before the user's own, skipping any option the user gave explicitly.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  auto cmd = std::find_first_of(args.begin(), args.end(), kCommands.begin(), kCommands.end());
  if (cmd == args.end()) return args;
  std::string path;
  std::set<std::string> given;
  for (auto it = cmd + 1; it != args.end(); ++it) {
    if (it->rfind("--", 0) != 0) continue;
    const auto eq = it->find('=');
    const std::string name = it->substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(name);
    if (name == "config") {
      if (eq != std::string::npos) {
        path = it->substr(eq + 1);
      } else if (it + 1 != args.end()) {
        path = *(it + 1);
      }
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw gfx::IoError("cannot open config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw gfx::ParseError("config " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw gfx::SchemaError("config " + path + ": expected a JSON object");

  std::vector<std::string> extra;
  for (const auto& [key, value] : doc.items()) {
    if (given.count(key) || key == "config" || key == "command") continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back("--" + key);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ",";
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      extra.push_back("--" + key);
      extra.push_back(joined);
    } else if (value.is_string()) {
      extra.push_back("--" + key);
      extra.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      extra.push_back("--" + key);
      extra.push_back(value.dump());
    } else {
      throw gfx::SchemaError("config " + path + ": unsupported value for '" + key + "'");
    }
  }
  args.insert(cmd + 1, extra.begin(), extra.end());
  return args;
}

// Prints the subcommand's options with their final values as one JSON line
// on stderr; feeding it back through --config reproduces the run.
void echo_config(const CLI::App& sub) {
  json doc;
  doc["command"] = sub.get_name();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_lnames().empty() ? "" : opt->get_lnames().front();
    if (name.empty() || name == "help" || name == "config") continue;
    if (opt->get_items_expected_max() == 0) {
      doc[name] = opt->count() > 0;
      continue;
    }
    std::vector<std::string> values = opt->results();
    if (values.empty()) {
      std::string def = opt->get_default_str();
      if (def.empty()) continue;
      if (def.front() == '[' && def.back() == ']') def = def.substr(1, def.size() - 2);
      values = {def};
    }
    if (opt->get_items_expected_max() > 1) {
      json arr = json::array();
      for (const auto& v : values) {
        std::stringstream parts(v);
        std::string part;
        while (std::getline(parts, part, ',')) arr.push_back(part);
      }
      doc[name] = arr;
    } else {
      doc[name] = values.back();
    }
  }
  std::cerr << "effective config: " << doc.dump() << '\n';
}

// --- shared helpers ----------------------------------------------------------

std::vector<gfx::SkeletonSequence> maybe_stabilize(std::vector<gfx::SkeletonSequence> seqs,
                                                   bool enabled) {
  if (enabled) {
    for (auto& s : seqs) s = gfx::stabilize(s);
  }
  return seqs;
}

std::string percent(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * x);
  return buf;
}

void print_report(const gfx::EvalReport& r) {
  std::printf("samples %zu  accuracy %s  loss %.4f\n", r.count, percent(r.accuracy).c_str(), r.mean_loss);
  std::printf("confusion (rows truth, columns prediction):\n");
  for (std::size_t t = 0; t < gfx::kClassCount; ++t) {
    std::printf("  %-6s", std::string(gfx::gesture_name(t)).c_str());
    for (std::size_t p = 0; p < gfx::kClassCount; ++p) std::printf(" %5zu", r.confusion[t][p]);
    std::printf("\n");
  }
}

json report_json(const gfx::EvalReport& r) {
  json conf = json::array();
  for (const auto& row : r.confusion) conf.push_back(row);
  return {{"count", r.count}, {"accuracy", r.accuracy}, {"mean_loss", r.mean_loss}, {"confusion", conf}};
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw gfx::IoError("cannot write " + path);
  out << doc.dump(2) << '\n';
}

struct TrainingOptions {
  double lr = 1e-4;
  std::size_t batch = 32;
  std::size_t epochs = 100;
  std::size_t patience = 10;
  double dropout = gfx::kDefaultDropout;
  double val_fraction = 0.1;
  std::size_t threads = 1;

  void add_to(CLI::App* sub) {
    sub->add_option("--lr", lr, "Adam learning rate")->capture_default_str();
    sub->add_option("--batch", batch, "minibatch size")->capture_default_str();
    sub->add_option("--epochs", epochs, "maximum epochs")->capture_default_str();
    sub->add_option("--patience", patience, "early-stop patience in epochs")->capture_default_str();
    sub->add_option("--dropout", dropout, "dropout rate")->capture_default_str();
    sub->add_option("--val-fraction", val_fraction,
                    "share of each training class held out for validation when --val is absent; 0 disables")
        ->capture_default_str();
    sub->add_option("--threads", threads, "worker threads; 1 is bitwise deterministic")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  gfx::TrainConfig config(std::uint64_t seed) const {
    gfx::TrainConfig c;
    c.learning_rate = lr;
    c.batch_size = batch;
    c.max_epochs = epochs;
    c.patience = patience;
    c.dropout = dropout;
    c.seed = seed;
    c.threads = threads;
    c.validate();
    return c;
  }

  // Validation set from --val, else a stratified share of the training data.
  std::pair<gfx::Dataset, gfx::Dataset> split(gfx::Dataset train, const std::string& val_path,
                                              bool stabilize, std::uint64_t seed) const {
    if (!val_path.empty()) {
      return {std::move(train), gfx::prepare_dataset(maybe_stabilize(gfx::load_jsonl(val_path), stabilize))};
    }
    if (val_fraction <= 0.0) return {std::move(train), {}};
    return gfx::split_dataset(train, val_fraction, seed);
  }
};

// --- subcommands -------------------------------------------------------------

struct SynthCmd {
  std::size_t n = 250;
  std::uint64_t seed = 7;
  double noise = 0.02;
  double jitter = 0.1;
  double rhythm_min = gfx::kMinRhythm;
  double rhythm_max = gfx::kMaxRhythm;
  double split = 0.8;
  double drop = 0.0;
  double spike = 0.0;
  std::vector<std::string> stream;
  std::string out, train_out, test_out;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("synth", "generate a labeled synthetic gesture corpus as JSONL");
    sub->add_option("--n", n, "sequences per class")->capture_default_str();
    sub->add_option("--seed", seed, "corpus seed")->capture_default_str();
    sub->add_option("--noise", noise, "Gaussian coordinate noise")->capture_default_str();
    sub->add_option("--jitter", jitter, "relative amplitude jitter")->capture_default_str();
    sub->add_option("--rhythm-min", rhythm_min, "slowest rhythm factor")->capture_default_str();
    sub->add_option("--rhythm-max", rhythm_max, "fastest rhythm factor")->capture_default_str();
    sub->add_option("--split", split, "train share per class")->capture_default_str();
    sub->add_option("--drop", drop, "keypoint drop rate applied after synthesis")->capture_default_str();
    sub->add_option("--spike", spike, "keypoint spike rate applied after synthesis")->capture_default_str();
    sub->add_option("--stream", stream,
                    "write one continuous stream of these gestures instead of a corpus, e.g. wave,idle,squat")
        ->delimiter(',');
    sub->add_option("--out", out, "JSONL output (train then test)")->required();
    sub->add_option("--train-out", train_out, "also write the train split here");
    sub->add_option("--test-out", test_out, "also write the test split here");
    sub->add_option("--config", "JSON file of option defaults");
    sub->callback([this] { run(); });
  }

  void degrade(std::vector<gfx::SkeletonSequence>& seqs) const {
    if (drop == 0.0 && spike == 0.0) return;
    gfx::Rng rng = gfx::Rng(seed).split("degrade");
    for (auto& s : seqs) s = gfx::simulate_degradation(s, drop, spike, rng).degraded;
  }

  void run() {
    if (!stream.empty()) {
      gfx::Rng rng = gfx::Rng(seed).split("stream");
      gfx::SkeletonSequence s;
      s.id = "stream-" + std::to_string(seed);
      s.fps = gfx::kSynthFps;
      for (const auto& name : stream) {
        gfx::GestureSpec g;
        g.label = gfx::parse_gesture(name);
        g.rhythm = rng.uniform(rhythm_min, rhythm_max);
        g.noise = noise;
        g.amplitude_jitter = jitter;
        g.seed = rng.next_u64();
        const auto clip = gfx::synth_gesture(g);
        s.frames.insert(s.frames.end(), clip.frames.begin(), clip.frames.end());
      }
      std::vector<gfx::SkeletonSequence> one{s};
      degrade(one);
      gfx::save_jsonl(one, out);
      std::printf("wrote a %zu-frame stream of %zu gestures to %s\n", s.frames.size(), stream.size(),
                  out.c_str());
      return;
    }
    gfx::CorpusConfig cfg;
    cfg.per_class = n;
    cfg.seed = seed;
    cfg.noise = noise;
    cfg.amplitude_jitter = jitter;
    cfg.rhythm_min = rhythm_min;
    cfg.rhythm_max = rhythm_max;
    cfg.split = split;
    gfx::Corpus corpus = gfx::make_corpus(cfg);
    degrade(corpus.train);
    degrade(corpus.test);
    const auto all = gfx::flatten(corpus);
    gfx::save_jsonl(all, out);
    if (!train_out.empty()) gfx::save_jsonl(corpus.train, train_out);
    if (!test_out.empty()) gfx::save_jsonl(corpus.test, test_out);
    std::printf("wrote %zu sequences (%zu train, %zu test) to %s\n", all.size(), corpus.train.size(),
                corpus.test.size(), out.c_str());
  }
};

struct StabilizeCmd {
  gfx::StabilizerConfig cfg;
  std::string in, out;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("stabilize", "fill gaps, remove spikes and smooth keypoint tracks");
    sub->add_option("--in", in, "input JSONL")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output JSONL")->required();
    sub->add_option("--median-window", cfg.median_window, "odd despike window")->capture_default_str();
    sub->add_option("--spike-threshold", cfg.spike_threshold, "distance from the median that counts as a spike")
        ->capture_default_str();
    sub->add_option("--smoothing", cfg.smoothing, "exponential smoothing alpha in (0, 1]")->capture_default_str();
    sub->add_option("--max-gap", cfg.max_gap, "longest interior gap that is interpolated")->capture_default_str();
    sub->add_option("--config", "JSON file of option defaults");
    sub->callback([this] { run(); });
  }

  void run() {
    cfg.validate();
    auto seqs = gfx::load_jsonl(in);
    std::size_t missing = 0;
    for (auto& s : seqs) {
      missing += s.missing_count();
      s = gfx::stabilize(s, cfg);
    }
    gfx::save_jsonl(seqs, out);
    std::printf("stabilized %zu sequences (%zu missing keypoints filled) into %s\n", seqs.size(), missing,
                out.c_str());
  }
};

struct TrainCmd {
  std::string variant = "its-lstm";
  std::uint64_t seed = 1;
  std::string train_path, val_path, out, history;
  bool stabilize = false;
  TrainingOptions opts;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("train", "train one architecture and save a checkpoint");
    sub->add_option("--variant", variant, "its-lstm | ts-lstm | ts-lstm-no-orig | single | double")
        ->capture_default_str();
    sub->add_option("--seed", seed, "initialization and training seed")->capture_default_str();
    sub->add_option("--train", train_path, "labeled JSONL")->required()->check(CLI::ExistingFile);
    sub->add_option("--val", val_path, "labeled validation JSONL")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "checkpoint output")->required();
    sub->add_option("--history", history, "per-epoch metrics as JSONL");
    sub->add_flag("--stabilize", stabilize, "stabilize sequences before preparing them");
    opts.add_to(sub);
    sub->add_option("--config", "JSON file of option defaults");
    sub->callback([this] { run(); });
  }

  void run() {
    const gfx::Variant v = gfx::parse_variant(variant);
    const auto cfg = opts.config(seed);
    auto data = gfx::prepare_dataset(maybe_stabilize(gfx::load_jsonl(train_path), stabilize));
    const auto [fit, val] = opts.split(std::move(data), val_path, stabilize, seed);
    gfx::Rng init(seed);
    const gfx::Model model = gfx::Model::build(gfx::model_spec(v), init);
    std::printf("training %s (%zu parameters) on %zu samples, %zu for validation\n",
                std::string(gfx::variant_name(v)).c_str(), model.parameter_count(), fit.size(), val.size());
    std::fflush(stdout);
    const auto result = gfx::train(model, fit, val, cfg, [](const gfx::EpochMetrics& e, const gfx::Model&) {
      std::printf("epoch %3zu  loss %.4f  acc %s", e.epoch, e.train_loss, percent(e.train_accuracy).c_str());
      if (e.val_loss) std::printf("  val loss %.4f  val acc %s", *e.val_loss, percent(*e.val_accuracy).c_str());
      std::printf("\n");
      std::fflush(stdout);
      return true;
    });
    gfx::save_checkpoint(result.model, out);
    if (!history.empty()) {
      std::ofstream h(history);
      if (!h) throw gfx::IoError("cannot write " + history);
      gfx::write_history_jsonl(h, result.history);
    }
    std::printf("best epoch %zu%s; checkpoint written to %s\n", result.history.best_epoch,
                result.history.early_stopped ? " (stopped early)" : "", out.c_str());
  }
};

struct EvalCmd {
  std::string model_path, in, out;
  std::size_t threads = 1;
  bool stabilize = false;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("eval", "accuracy, loss and confusion matrix of a checkpoint");
    sub->add_option("--model", model_path, "checkpoint")->required()->check(CLI::ExistingFile);
    sub->add_option("--in", in, "labeled JSONL")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "report as JSON");
    sub->add_option("--threads", threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_flag("--stabilize", stabilize, "stabilize sequences before preparing them");
    sub->add_option("--config", "JSON file of option defaults");
    sub->callback([this] { run(); });
  }

  void run() {
    const gfx::Model model = gfx::load_checkpoint(model_path);
    const auto data = gfx::prepare_dataset(maybe_stabilize(gfx::load_jsonl(in), stabilize));
    const auto report = gfx::evaluate(model, data, threads);
    std::printf("model %s (%s)\n", model_path.c_str(), std::string(gfx::variant_name(model.spec.variant)).c_str());
    print_report(report);
    if (!out.empty()) write_json_file(out, report_json(report));
  }
};

struct CompareCmd {
  std::string train_path, test_path, out;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::vector<std::string> variants = {"its-lstm", "ts-lstm", "ts-lstm-no-orig", "single", "double"};
  bool stabilize = false;
  TrainingOptions opts;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("compare", "train every variant per seed and tabulate test results");
    sub->add_option("--train", train_path, "labeled training JSONL")->required()->check(CLI::ExistingFile);
    sub->add_option("--test", test_path, "labeled test JSONL")->required()->check(CLI::ExistingFile);
    sub->add_option("--seeds", seeds, "seeds, comma separated")->delimiter(',')->capture_default_str();
    sub->add_option("--variants", variants, "variants, comma separated")->delimiter(',')->capture_default_str();
    sub->add_option("--out", out, "comparison as JSON");
    sub->add_flag("--stabilize", stabilize, "stabilize sequences before preparing them");
    opts.epochs = 15;
    opts.patience = 3;
    opts.add_to(sub);
    sub->add_option("--config", "JSON file of option defaults");
    sub->callback([this] { run(); });
  }

  void run() {
    std::vector<gfx::Variant> vs;
    for (const auto& name : variants) vs.push_back(gfx::parse_variant(name));
    const auto cfg = opts.config(seeds.empty() ? 1 : seeds.front());
    gfx::CompareInput input;
    auto train = gfx::prepare_dataset(maybe_stabilize(gfx::load_jsonl(train_path), stabilize));
    std::tie(input.train, input.validation) = opts.split(std::move(train), "", stabilize, 1);
    input.test = gfx::prepare_dataset(maybe_stabilize(gfx::load_jsonl(test_path), stabilize));
    const auto table = gfx::compare_models(input, cfg, seeds, vs,
                                           [](gfx::Variant v, std::uint64_t seed, const gfx::EvalReport& r) {
                                             std::printf("%-16s seed %-4llu acc %s  loss %.4f\n",
                                                         std::string(gfx::variant_name(v)).c_str(),
                                                         static_cast<unsigned long long>(seed),
                                                         percent(r.accuracy).c_str(), r.mean_loss);
                                             std::fflush(stdout);
                                           });
    std::printf("\n%s", gfx::format_comparison(table).c_str());
    if (!out.empty()) {
      std::ofstream f(out);
      if (!f) throw gfx::IoError("cannot write " + out);
      gfx::write_comparison_json(f, table);
    }
  }
};

struct GradcheckCmd {
  std::vector<std::uint64_t> seeds = {1};
  std::string variant = "its-lstm";
  gfx::GradcheckOptions opts;
  double tolerance = 1e-4;
  bool per_tensor = false;
  int* exit_code = nullptr;

  void add(CLI::App& app, int& code) {
    exit_code = &code;
    auto* sub = app.add_subcommand("gradcheck", "finite-difference check of a reduced model's gradients");
    sub->add_option("--seed", seeds, "seeds, comma separated")->delimiter(',')->capture_default_str();
    sub->add_option("--variant", variant, "architecture of the reduced clone")->capture_default_str();
    sub->add_option("--hidden", opts.hidden_size, "hidden size of the clone")->capture_default_str();
    sub->add_option("--projection-divisor", opts.projection_divisor, "projection widths are divided by this")
        ->capture_default_str();
    sub->add_option("--batch", opts.batch, "samples in the checked batch")->capture_default_str();
    sub->add_option("--step", opts.step, "central-difference step")->capture_default_str();
    sub->add_option("--max-entries", opts.max_entries, "entries per tensor, 0 for all")->capture_default_str();
    sub->add_option("--tolerance", tolerance, "largest accepted relative error")->capture_default_str();
    sub->add_flag("--per-tensor", per_tensor, "print every tensor's worst error");
    sub->add_option("--config", "JSON file of option defaults");
    sub->callback([this] { run(); });
  }

  void run() {
    opts.variant = gfx::parse_variant(variant);
    double worst = 0.0;
    for (std::uint64_t seed : seeds) {
      const auto r = gfx::gradcheck_model(seed, opts);
      std::printf("seed %llu: %zu parameters, %zu entries checked, max relative error %.3e\n",
                  static_cast<unsigned long long>(seed), r.parameters, r.entries, r.max_rel_error);
      if (per_tensor) {
        for (const auto& t : r.tensors) {
          std::printf("  %-14s %6zu entries  rel %.3e  abs %.3e\n", t.name.c_str(), t.entries, t.max_rel_error,
                      t.max_abs_error);
        }
      }
      worst = std::max(worst, r.max_rel_error);
    }
    const bool ok = worst < tolerance;
    std::printf("max relative error %.3e %s %.0e: %s\n", worst, ok ? "<" : ">=", tolerance, ok ? "ok" : "FAILED");
    if (!ok) *exit_code = kErrorExit;
  }
};

struct PredictCmd {
  std::string model_path, in, out;
  std::size_t threads = 1;
  bool stabilize = false;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("predict", "classify every sequence of a JSONL file");
    sub->add_option("--model", model_path, "checkpoint")->required()->check(CLI::ExistingFile);
    sub->add_option("--in", in, "JSONL; labels are ignored")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "predictions as JSONL");
    sub->add_option("--threads", threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_flag("--stabilize", stabilize, "stabilize sequences before preparing them");
    sub->add_option("--config", "JSON file of option defaults");
    sub->callback([this] { run(); });
  }

  void run() {
    const gfx::Model model = gfx::load_checkpoint(model_path);
    const auto seqs = maybe_stabilize(gfx::load_jsonl(in), stabilize);
    std::vector<gfx::Matrix> inputs;
    for (const auto& s : seqs) inputs.push_back(gfx::to_tensor(gfx::prepare_for_model(s)));
    const auto preds = gfx::predict_batch(inputs, model, threads);
    std::ofstream file;
    if (!out.empty()) {
      file.open(out);
      if (!file) throw gfx::IoError("cannot write " + out);
    }
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      const std::string name(gfx::gesture_name(preds[i].label));
      std::printf("%s\t%s\t%.4f\n", seqs[i].id.c_str(), name.c_str(), preds[i].confidence);
      if (file.is_open()) {
        file << json{{"id", seqs[i].id}, {"label", preds[i].label}, {"action", name},
                     {"confidence", preds[i].confidence}}.dump()
             << '\n';
      }
    }
  }
};

struct TimelineCmd {
  std::string model_path, in, out, windows_out;
  gfx::TriggerConfig trig;
  std::size_t threads = 1;
  bool raw = false;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("timeline", "turn a keypoint stream into a VFX event timeline");
    sub->add_option("--model", model_path, "checkpoint")->required()->check(CLI::ExistingFile);
    sub->add_option("--in", in, "JSONL holding exactly one stream")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "timeline JSON")->required();
    sub->add_option("--windows", windows_out, "per-window predictions as JSONL");
    sub->add_option("--hop", trig.hop, "frames between window starts")->capture_default_str();
    sub->add_option("--threshold", trig.threshold, "minimum window confidence")->capture_default_str();
    sub->add_option("--consecutive", trig.consecutive, "agreeing windows needed to fire")->capture_default_str();
    sub->add_option("--refractory", trig.refractory, "frames before an action may fire again")
        ->capture_default_str();
    sub->add_option("--threads", threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_flag("--raw", raw, "skip stabilization of the stream");
    sub->add_option("--config", "JSON file of option defaults");
    sub->callback([this] { run(); });
  }

  void run() {
    trig.validate();
    const gfx::Model model = gfx::load_checkpoint(model_path);
    const auto seqs = gfx::load_jsonl(in);
    if (seqs.size() != 1) {
      throw gfx::DataError(in + " holds " + std::to_string(seqs.size()) + " sequences; expected one stream");
    }
    const auto stream = raw ? seqs[0] : gfx::stabilize(seqs[0]);
    const auto windows = gfx::stream_infer(stream, model, trig, threads);
    const auto tl = gfx::emit_timeline(windows, trig, stream.fps, stream.id);
    gfx::write_timeline(tl, out);
    if (!windows_out.empty()) {
      std::ofstream w(windows_out);
      if (!w) throw gfx::IoError("cannot write " + windows_out);
      for (const auto& r : windows) {
        w << json{{"end_frame", r.end_frame}, {"time_s", r.time_s},
                  {"action", gfx::gesture_name(r.label)}, {"confidence", r.confidence}}.dump()
          << '\n';
      }
    }
    std::printf("%zu windows, %zu events written to %s\n", windows.size(), tl.events.size(), out.c_str());
    for (const auto& e : tl.events) {
      std::printf("  %8.3fs  %-6s %.3f  %s @ %s\n", e.t_start_s, std::string(gfx::gesture_name(e.action)).c_str(),
                  e.confidence, e.effect.c_str(), std::string(gfx::joint_name(e.anchor_joint)).c_str());
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gesturefx: skeleton gesture recognition and VFX timelines"};
  app.require_subcommand(1);
  int exit_code = 0;

  SynthCmd synth;
  StabilizeCmd stabilize;
  TrainCmd train;
  EvalCmd eval;
  CompareCmd compare;
  GradcheckCmd gradcheck;
  PredictCmd predict;
  TimelineCmd timeline;
  synth.add(app);
  stabilize.add(app);
  train.add(app);
  eval.add(app);
  compare.add(app);
  gradcheck.add(app, exit_code);
  predict.add(app);
  timeline.add(app);

  // Echo before the subcommand callback runs, once every option is final.
  app.parse_complete_callback([&app] {
    for (const CLI::App* sub : app.get_subcommands()) echo_config(*sub);
  });

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageExit;
  } catch (const gfx::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kErrorExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kErrorExit;
  }
  return exit_code;
}
