#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "gesturefx/rng.hpp"
#include "gesturefx/skeleton.hpp"

namespace gesturefx {

enum class GestureClass : std::size_t { kWave = 0, kRaise = 1, kSquat = 2, kIdle = 3 };

std::string_view gesture_name(std::size_t label);  // wave, raise, squat, idle
std::size_t parse_gesture(std::string_view name);

inline constexpr double kSynthFps = 30.0;
inline constexpr double kMinRhythm = 0.5;
inline constexpr double kMaxRhythm = 2.0;

// Upright COCO-18 pose from the bundled asset (assets/base_pose_v1.json).
const std::array<Keypoint, kJointCount>& base_pose();
int base_pose_version();

struct GestureSpec {
  std::size_t label = 0;   // GestureClass as an index
  double rhythm = 1.0;     // r in [0.5, 2]
  double noise = 0.0;      // Gaussian sigma in image units
  double amplitude_jitter = 0.0;  // motion amplitude scaled by 1 + U(-j, j)
  std::uint64_t seed = 0;

  void validate() const;
};

// Renders round(24 / r) frames at 30 fps. Motion per class, with u in [0, 1]
// the normalized frame time and phi = u^r the time-warped phase:
//   wave:  right arm raised, wrist x = c + a*sin(2*pi*2r*u)  (2r full cycles)
//   raise: both wrists travel monotonically from hip height to overhead along phi
//   squat: hips, knees and ankles move down by a*sin(pi*phi) and back
//   idle:  base pose
// then Gaussian noise is added to every coordinate.
SkeletonSequence synth_gesture(const GestureSpec& spec);

struct CorpusConfig {
  std::size_t per_class = 250;
  double rhythm_min = kMinRhythm;
  double rhythm_max = kMaxRhythm;
  double noise = 0.02;
  double amplitude_jitter = 0.1;
  std::uint64_t seed = 7;
  double split = 0.8;  // train fraction, stratified per class
};

struct Corpus {
  std::vector<SkeletonSequence> train;
  std::vector<SkeletonSequence> test;
};

Corpus make_corpus(const CorpusConfig& cfg);
// All sequences of a corpus, train first.
std::vector<SkeletonSequence> flatten(const Corpus& corpus);

struct Degradation {
  SkeletonSequence degraded;
  SkeletonSequence truth;
  std::vector<std::array<bool, kJointCount>> dropped;
  std::vector<std::array<bool, kJointCount>> spiked;
};

// Each joint-frame is dropped with probability `drop_rate` (flagged missing,
// confidence 0, coordinates zeroed as OpenPose reports undetected parts) or,
// otherwise, replaced with probability `spike_rate` by a uniform random
// position in the unit square with a uniform random confidence.
Degradation simulate_degradation(const SkeletonSequence& seq, double drop_rate, double spike_rate,
                                 Rng& rng);

// Rhythm-robust class statistic: the per-joint motion-energy profile of the
// prepared clip, matched by cosine similarity against noiseless templates of
// wave, raise and squat. Clips whose total energy is below `idle_energy` are
// idle.
std::size_t template_classify(const SkeletonSequence& seq, double idle_energy = 1e-6);
std::array<double, kJointCount> motion_energy(const SkeletonSequence& prepared);

// Variance of the right-wrist x coordinate over a clip (raw image units).
double wrist_variance(const SkeletonSequence& seq);

}  // namespace gesturefx
