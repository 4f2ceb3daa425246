#include "gesturefx/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <json.hpp>

#include "base_pose_asset.hpp"
#include "gesturefx/error.hpp"
#include "gesturefx/model.hpp"

namespace gesturefx {
namespace {

constexpr std::array<std::string_view, 4> kGestureNames = {"wave", "raise", "squat", "idle"};

struct Point {
  double x;
  double y;
};

Point lerp(Point a, Point b, double w) { return {a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)}; }

struct BasePose {
  int version = 0;
  std::array<Keypoint, kJointCount> joints{};
};

BasePose parse_base_pose() {
  const auto doc = nlohmann::json::parse(detail::kBasePoseJson);
  BasePose pose;
  pose.version = doc.at("format_version").get<int>();
  const auto& joints = doc.at("joints");
  if (joints.size() != kJointCount) throw SchemaError("base pose asset must list 18 joints");
  for (std::size_t j = 0; j < kJointCount; ++j) {
    pose.joints[j] = {joints[j].at(0).get<double>(), joints[j].at(1).get<double>(), 1.0, false};
  }
  return pose;
}

const BasePose& base() {
  static const BasePose pose = parse_base_pose();
  return pose;
}

Point at(std::size_t joint) { return {base().joints[joint].x, base().joints[joint].y}; }

// Wave geometry: right arm held up beside the head.
constexpr Point kWaveElbow{0.36, 0.24};
constexpr double kWaveWristY = 0.14;
constexpr double kWaveAmplitude = 0.06;
// Raise geometry: both arms end overhead.
constexpr Point kRaiseRWrist{0.44, 0.10};
constexpr Point kRaiseLWrist{0.56, 0.10};
constexpr Point kRaiseRElbow{0.40, 0.20};
constexpr Point kRaiseLElbow{0.60, 0.20};
constexpr double kSquatDepth = 0.12;

void place(KeypointFrame& frame, std::size_t joint, Point p) {
  frame[joint].x = p.x;
  frame[joint].y = p.y;
}

KeypointFrame render(std::size_t label, double u, double rhythm, double amplitude) {
  KeypointFrame frame;
  frame.joints = base().joints;
  const double phase = std::pow(u, rhythm);
  switch (static_cast<GestureClass>(label)) {
    case GestureClass::kWave: {
      place(frame, kRElbow, kWaveElbow);
      const double dx = kWaveAmplitude * amplitude *
                        std::sin(2.0 * std::numbers::pi * 2.0 * rhythm * u);
      place(frame, kRWrist, {kWaveElbow.x + dx, kWaveWristY});
      break;
    }
    case GestureClass::kRaise: {
      const double w = amplitude * phase;
      place(frame, kRWrist, lerp(at(kRWrist), kRaiseRWrist, w));
      place(frame, kLWrist, lerp(at(kLWrist), kRaiseLWrist, w));
      place(frame, kRElbow, lerp(at(kRElbow), kRaiseRElbow, w));
      place(frame, kLElbow, lerp(at(kLElbow), kRaiseLElbow, w));
      break;
    }
    case GestureClass::kSquat: {
      const double dy = kSquatDepth * amplitude * std::sin(std::numbers::pi * phase);
      for (std::size_t j : {kRHip, kRKnee, kRAnkle, kLHip, kLKnee, kLAnkle}) frame[j].y += dy;
      break;
    }
    case GestureClass::kIdle:
      break;
  }
  return frame;
}

std::array<std::array<double, kJointCount>, 3> build_templates() {
  std::array<std::array<double, kJointCount>, 3> out{};
  for (std::size_t c = 0; c < 3; ++c) {
    GestureSpec spec;
    spec.label = c;
    auto energy = motion_energy(prepare_for_model(synth_gesture(spec)));
    double norm = 0.0;
    for (double e : energy) norm += e * e;
    norm = std::sqrt(norm);
    for (double& e : energy) e /= norm;
    out[c] = energy;
  }
  return out;
}

}  // namespace

std::string_view gesture_name(std::size_t label) {
  if (label >= kGestureNames.size()) {
    throw ArgumentError("gesture class " + std::to_string(label) + " outside 0..3");
  }
  return kGestureNames[label];
}

std::size_t parse_gesture(std::string_view name) {
  for (std::size_t c = 0; c < kGestureNames.size(); ++c) {
    if (kGestureNames[c] == name) return c;
  }
  throw ArgumentError("unknown gesture '" + std::string(name) + "'");
}

const std::array<Keypoint, kJointCount>& base_pose() { return base().joints; }
int base_pose_version() { return base().version; }

void GestureSpec::validate() const {
  if (label >= kClassCount) {
    throw ArgumentError("gesture class " + std::to_string(label) + " outside 0..3");
  }
  if (!(rhythm >= kMinRhythm && rhythm <= kMaxRhythm)) {
    throw ArgumentError("rhythm factor " + std::to_string(rhythm) + " outside [0.5, 2]");
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ArgumentError("noise sigma must be >= 0");
  if (!(amplitude_jitter >= 0.0 && amplitude_jitter < 1.0)) {
    throw ArgumentError("amplitude jitter must lie in [0, 1)");
  }
}

SkeletonSequence synth_gesture(const GestureSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const double amplitude = 1.0 + spec.amplitude_jitter * rng.uniform(-1.0, 1.0);
  const auto frames = static_cast<std::size_t>(std::lround(24.0 / spec.rhythm));

  SkeletonSequence seq;
  seq.id = std::string(gesture_name(spec.label)) + "-" + std::to_string(spec.seed);
  seq.fps = kSynthFps;
  seq.label = spec.label;
  seq.frames.reserve(frames);
  for (std::size_t n = 0; n < frames; ++n) {
    const double u = static_cast<double>(n) / static_cast<double>(frames - 1);
    KeypointFrame frame = render(spec.label, u, spec.rhythm, amplitude);
    if (spec.noise > 0.0) {
      for (auto& p : frame.joints) {
        p.x += rng.normal(0.0, spec.noise);
        p.y += rng.normal(0.0, spec.noise);
      }
    }
    seq.frames.push_back(frame);
  }
  return seq;
}

Corpus make_corpus(const CorpusConfig& cfg) {
  if (cfg.per_class == 0) throw ArgumentError("corpus needs at least one sample per class");
  if (!(cfg.split > 0.0 && cfg.split < 1.0)) throw ArgumentError("split must lie in (0, 1)");
  if (!(cfg.rhythm_min >= kMinRhythm && cfg.rhythm_max <= kMaxRhythm &&
        cfg.rhythm_min <= cfg.rhythm_max)) {
    throw ArgumentError("rhythm range must lie inside [0.5, 2]");
  }
  const Rng root(cfg.seed);
  const auto train_per_class =
      static_cast<std::size_t>(std::floor(cfg.split * static_cast<double>(cfg.per_class)));
  Corpus corpus;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    std::vector<SkeletonSequence> items;
    items.reserve(cfg.per_class);
    for (std::size_t k = 0; k < cfg.per_class; ++k) {
      Rng child = root.split("sample/" + std::to_string(c) + "/" + std::to_string(k));
      GestureSpec spec;
      spec.label = c;
      spec.rhythm = child.uniform(cfg.rhythm_min, cfg.rhythm_max);
      spec.noise = cfg.noise;
      spec.amplitude_jitter = cfg.amplitude_jitter;
      spec.seed = child.next_u64();
      auto seq = synth_gesture(spec);
      seq.id = "s" + std::to_string(cfg.seed) + "-" + std::string(gesture_name(c)) + "-" +
               std::to_string(k);
      items.push_back(std::move(seq));
    }
    // Fisher-Yates with a per-class stream for the stratified split.
    Rng shuffle = root.split("split/" + std::to_string(c));
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[shuffle.below(i)]);
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
      (i < train_per_class ? corpus.train : corpus.test).push_back(std::move(items[i]));
    }
  }
  return corpus;
}

std::vector<SkeletonSequence> flatten(const Corpus& corpus) {
  std::vector<SkeletonSequence> all = corpus.train;
  all.insert(all.end(), corpus.test.begin(), corpus.test.end());
  return all;
}

Degradation simulate_degradation(const SkeletonSequence& seq, double drop_rate, double spike_rate,
                                 Rng& rng) {
  if (!(drop_rate >= 0.0 && drop_rate < 1.0) || !(spike_rate >= 0.0 && spike_rate < 1.0)) {
    throw ArgumentError("degradation rates must lie in [0, 1)");
  }
  Degradation d;
  d.truth = seq;
  d.degraded = seq;
  d.dropped.assign(seq.frames.size(), {});
  d.spiked.assign(seq.frames.size(), {});
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      Keypoint& p = d.degraded.frames[t][j];
      if (rng.uniform() < drop_rate) {
        p = Keypoint{0.0, 0.0, 0.0, true};
        d.dropped[t][j] = true;
      } else if (rng.uniform() < spike_rate) {
        p.x = rng.uniform();
        p.y = rng.uniform();
        p.confidence = rng.uniform();
        d.spiked[t][j] = true;
      }
    }
  }
  return d;
}

std::array<double, kJointCount> motion_energy(const SkeletonSequence& prepared) {
  std::array<double, kJointCount> energy{};
  const auto n = static_cast<double>(prepared.frames.size());
  for (std::size_t j = 0; j < kJointCount; ++j) {
    double mx = 0.0;
    double my = 0.0;
    for (const auto& f : prepared.frames) {
      mx += f[j].x;
      my += f[j].y;
    }
    mx /= n;
    my /= n;
    double e = 0.0;
    for (const auto& f : prepared.frames) {
      e += (f[j].x - mx) * (f[j].x - mx) + (f[j].y - my) * (f[j].y - my);
    }
    energy[j] = e / n;
  }
  return energy;
}

std::size_t template_classify(const SkeletonSequence& seq, double idle_energy) {
  static const auto templates = build_templates();
  const auto energy = motion_energy(prepare_for_model(seq));
  double total = 0.0;
  for (double e : energy) total += e;
  if (total < idle_energy) return static_cast<std::size_t>(GestureClass::kIdle);
  double norm = 0.0;
  for (double e : energy) norm += e * e;
  norm = std::sqrt(norm);
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t c = 0; c < templates.size(); ++c) {
    double score = 0.0;
    for (std::size_t j = 0; j < kJointCount; ++j) score += templates[c][j] * energy[j];
    score /= norm;
    if (score > best_score) {
      best_score = score;
      best = c;
    }
  }
  return best;
}

double wrist_variance(const SkeletonSequence& seq) {
  if (seq.frames.empty()) return 0.0;
  double mean = 0.0;
  for (const auto& f : seq.frames) mean += f[kRWrist].x;
  mean /= static_cast<double>(seq.frames.size());
  double var = 0.0;
  for (const auto& f : seq.frames) var += (f[kRWrist].x - mean) * (f[kRWrist].x - mean);
  return var / static_cast<double>(seq.frames.size());
}

}  // namespace gesturefx
