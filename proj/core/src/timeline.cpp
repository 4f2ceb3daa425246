#include "gesturefx/timeline.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "gesturefx/error.hpp"
#include "gesturefx/synth.hpp"
#include "gesturefx/training.hpp"

namespace gesturefx {
namespace {

using nlohmann::json;

[[noreturn]] void schema(const std::string& where, const std::string& what) {
  throw SchemaError("timeline " + where + ": " + what);
}

}  // namespace

void TriggerConfig::validate() const {
  if (hop == 0) throw ArgumentError("trigger hop must be >= 1");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ArgumentError("trigger threshold must lie in (0, 1]");
  if (consecutive == 0) throw ArgumentError("consecutive window count must be >= 1");
  for (const auto& e : effects) {
    if (e && e->anchor_joint >= kJointCount) throw ArgumentError("anchor joint out of range");
  }
}

std::vector<WindowResult> stream_infer(const SkeletonSequence& stream, const Model& model,
                                       const TriggerConfig& cfg, std::size_t threads) {
  cfg.validate();
  const std::size_t len = model.spec.seq_len;
  if (stream.frames.size() < len) {
    throw ArgumentError("stream has " + std::to_string(stream.frames.size()) +
                        " frames; at least " + std::to_string(len) + " are required");
  }
  if (!(stream.fps > 0.0)) throw ArgumentError("stream fps must be positive");
  std::vector<Matrix> inputs;
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + len <= stream.frames.size(); s += cfg.hop) {
    SkeletonSequence window;
    window.id = stream.id;
    window.fps = stream.fps;
    window.frames.assign(stream.frames.begin() + static_cast<std::ptrdiff_t>(s),
                         stream.frames.begin() + static_cast<std::ptrdiff_t>(s + len));
    inputs.push_back(to_tensor(normalize(window)));
    starts.push_back(s);
  }
  const auto preds = predict_batch(inputs, model, threads);
  std::vector<WindowResult> out;
  out.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::size_t end = starts[i] + len - 1;
    out.push_back({end, static_cast<double>(end) / stream.fps, preds[i].label, preds[i].confidence});
  }
  return out;
}

VfxTimeline emit_timeline(const std::vector<WindowResult>& windows, const TriggerConfig& cfg,
                          double fps, std::string stream_id) {
  cfg.validate();
  if (!(fps > 0.0)) throw ArgumentError("timeline fps must be positive");
  VfxTimeline tl;
  tl.stream_id = std::move(stream_id);
  tl.fps = fps;

  std::array<std::optional<std::size_t>, kClassCount> last_fired{};
  std::optional<std::size_t> run_label;
  std::size_t run_length = 0;
  for (const auto& w : windows) {
    const bool bound = w.label < kClassCount && cfg.effects[w.label].has_value();
    const bool qualifies = bound && w.confidence >= cfg.threshold;
    if (!qualifies) {
      run_label.reset();
      run_length = 0;
      continue;
    }
    if (run_label == w.label) {
      ++run_length;
    } else {
      run_label = w.label;
      run_length = 1;
    }
    if (run_length < cfg.consecutive) continue;

    const auto& last = last_fired[w.label];
    const bool refractory = last && w.end_frame - *last < cfg.refractory;
    if (!refractory) {
      const auto& binding = *cfg.effects[w.label];
      tl.events.push_back({w.time_s, w.label, w.confidence, binding.effect, binding.anchor_joint});
      last_fired[w.label] = w.end_frame;
    }
    run_label.reset();
    run_length = 0;
  }
  return tl;
}

void write_timeline(std::ostream& out, const VfxTimeline& tl) {
  json events = json::array();
  for (const auto& e : tl.events) {
    events.push_back({{"t_start_s", e.t_start_s},
                      {"action", gesture_name(e.action)},
                      {"confidence", e.confidence},
                      {"effect", e.effect},
                      {"anchor_joint", e.anchor_joint}});
  }
  json doc = {{"stream_id", tl.stream_id}, {"fps", tl.fps}, {"events", events}};
  out << doc.dump(2) << '\n';
}

VfxTimeline read_timeline(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("timeline is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema("root", "expected an object");
  VfxTimeline tl;
  if (!doc.contains("stream_id") || !doc["stream_id"].is_string()) {
    schema("stream_id", "must be a string");
  }
  tl.stream_id = doc["stream_id"].get<std::string>();
  if (!doc.contains("fps") || !doc["fps"].is_number() || !(doc["fps"].get<double>() > 0.0)) {
    schema("fps", "must be a positive number");
  }
  tl.fps = doc["fps"].get<double>();
  if (!doc.contains("events") || !doc["events"].is_array()) schema("events", "must be an array");
  double previous = 0.0;
  for (std::size_t i = 0; i < doc["events"].size(); ++i) {
    const auto& e = doc["events"][i];
    const std::string at = "events[" + std::to_string(i) + "]";
    if (!e.is_object()) schema(at, "expected an object");
    VfxEvent ev;
    if (!e.contains("t_start_s") || !e["t_start_s"].is_number()) {
      schema(at + ".t_start_s", "must be a number");
    }
    ev.t_start_s = e["t_start_s"].get<double>();
    if (!(ev.t_start_s >= 0.0) || !std::isfinite(ev.t_start_s)) {
      schema(at + ".t_start_s", "must be non-negative");
    }
    if (ev.t_start_s < previous) schema(at + ".t_start_s", "events must be time-ordered");
    previous = ev.t_start_s;
    if (!e.contains("action") || !e["action"].is_string()) schema(at + ".action", "must be a string");
    try {
      ev.action = parse_gesture(e["action"].get<std::string>());
    } catch (const ArgumentError& err) {
      schema(at + ".action", err.what());
    }
    if (!e.contains("confidence") || !e["confidence"].is_number()) {
      schema(at + ".confidence", "must be a number");
    }
    ev.confidence = e["confidence"].get<double>();
    if (!(ev.confidence >= 0.0 && ev.confidence <= 1.0)) {
      schema(at + ".confidence", "must lie in [0, 1]");
    }
    if (!e.contains("effect") || !e["effect"].is_string()) schema(at + ".effect", "must be a string");
    ev.effect = e["effect"].get<std::string>();
    if (!e.contains("anchor_joint") || !e["anchor_joint"].is_number_integer() ||
        e["anchor_joint"].get<long long>() < 0 ||
        e["anchor_joint"].get<long long>() >= static_cast<long long>(kJointCount)) {
      schema(at + ".anchor_joint", "must be a joint index in 0..17");
    }
    ev.anchor_joint = e["anchor_joint"].get<std::size_t>();
    tl.events.push_back(std::move(ev));
  }
  return tl;
}

void write_timeline(const VfxTimeline& tl, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_timeline(out, tl);
  if (!out) throw IoError("write failed for " + path.string());
}

VfxTimeline read_timeline(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_timeline(in);
}

}  // namespace gesturefx
