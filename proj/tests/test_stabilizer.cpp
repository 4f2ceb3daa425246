#include <gtest/gtest.h>

#include <cmath>

#include "gesturefx/error.hpp"
#include "gesturefx/stabilizer.hpp"
#include "gesturefx/synth.hpp"
#include "support.hpp"

using namespace gesturefx;
using gfx_test::ramp_sequence;

namespace {

SkeletonSequence constant_sequence(std::size_t n) { return ramp_sequence(n, 0.0); }

SkeletonSequence noisy_gesture(std::uint64_t seed) {
  Rng rng(seed);
  GestureSpec g;
  g.label = rng.below(4);
  g.rhythm = rng.uniform(kMinRhythm, kMaxRhythm);
  g.noise = 0.005;
  g.amplitude_jitter = 0.1;
  g.seed = seed;
  return synth_gesture(g);
}

}  // namespace

TEST(FillGaps, CompleteInputIsIdentity) {
  const auto s = ramp_sequence(12);
  EXPECT_EQ(fill_gaps(s), s);
}

TEST(FillGaps, MidpointOfSingleGap) {
  auto s = constant_sequence(3);
  s.frames[0][kRWrist] = {0.0, 0.0, 1.0, false};
  s.frames[1][kRWrist] = {0.0, 0.0, 0.0, true};
  s.frames[2][kRWrist] = {1.0, 1.0, 1.0, false};
  const auto f = fill_gaps(s);
  EXPECT_DOUBLE_EQ(f.frames[1][kRWrist].x, 0.5);
  EXPECT_DOUBLE_EQ(f.frames[1][kRWrist].y, 0.5);
  EXPECT_FALSE(f.frames[1][kRWrist].missing);
  EXPECT_EQ(f.frames[0][kRWrist], s.frames[0][kRWrist]);
  EXPECT_EQ(f.frames[2][kRWrist], s.frames[2][kRWrist]);
}

TEST(FillGaps, LeadingAndTrailingHold) {
  auto s = ramp_sequence(10);
  for (std::size_t t : {0u, 1u, 8u, 9u}) s.frames[t][kLEar] = {0.0, 0.0, 0.0, true};
  const auto f = fill_gaps(s);
  EXPECT_EQ(f.frames[0][kLEar], s.frames[2][kLEar]);
  EXPECT_EQ(f.frames[1][kLEar], s.frames[2][kLEar]);
  EXPECT_EQ(f.frames[9][kLEar], s.frames[7][kLEar]);
  EXPECT_EQ(f.missing_count(), 0u);
}

TEST(FillGaps, GapLongerThanMaxIsError) {
  auto s = ramp_sequence(12);
  for (std::size_t t = 2; t < 9; ++t) s.frames[t][kRKnee] = {0.0, 0.0, 0.0, true};
  try {
    fill_gaps(s);
    FAIL() << "expected GapError";
  } catch (const GapError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("r_knee"), std::string::npos) << msg;
    EXPECT_NE(msg.find("2..8"), std::string::npos) << msg;
  }
  s.frames[8][kRKnee].missing = false;
  s.frames[8][kRKnee].confidence = 1.0;
  EXPECT_NO_THROW(fill_gaps(s));
}

TEST(FillGaps, NeverObservedIsError) {
  auto s = ramp_sequence(5);
  for (auto& f : s.frames) f[kNose] = {0.0, 0.0, 0.0, true};
  EXPECT_THROW(fill_gaps(s), GapError);
}

TEST(Despike, RestoresConstantExactly) {
  auto s = constant_sequence(15);
  const auto clean = s;
  s.frames[7][kRWrist].x += 0.6;
  s.frames[3][kLAnkle].y -= 0.4;
  EXPECT_EQ(despike(s), clean);
}

TEST(Despike, SlowRampUntouchedAndIdempotent) {
  const auto s = ramp_sequence(30, 0.01);
  EXPECT_EQ(despike(s), s);
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    auto d = simulate_degradation(noisy_gesture(trial), 0.0, 0.1, rng).degraded;
    const auto once = despike(d);
    EXPECT_EQ(despike(once), once) << trial;
  }
}

TEST(Despike, RequiresCompleteInput) {
  auto s = ramp_sequence(5);
  s.frames[2][kNeck].missing = true;
  s.frames[2][kNeck].confidence = 0.0;
  EXPECT_THROW(despike(s), PreconditionError);
  EXPECT_THROW(smooth(s), PreconditionError);
}

TEST(Smooth, FullTrustIsIdentityAndConstantsHold) {
  const auto s = ramp_sequence(10, 0.05);
  StabilizerConfig one;
  one.smoothing = 1.0;
  EXPECT_EQ(smooth(s, one), s);
  const auto c = constant_sequence(20);
  for (double a : {0.1, 0.5, 0.9}) {
    StabilizerConfig cfg;
    cfg.smoothing = a;
    EXPECT_EQ(smooth(c, cfg), c);
  }
}

TEST(Smooth, ConfidenceWeightedRecurrence) {
  auto s = constant_sequence(3);
  s.frames[1][kNose] = {1.0, 0.0, 0.5, false};
  const double x0 = s.frames[0][kNose].x;
  StabilizerConfig cfg;
  cfg.smoothing = 0.5;
  const auto out = smooth(s, cfg);
  const double s1 = 0.75 * x0 + 0.25 * 1.0;
  EXPECT_DOUBLE_EQ(out.frames[1][kNose].x, s1);
  EXPECT_DOUBLE_EQ(out.frames[2][kNose].x, 0.5 * s1 + 0.5 * x0);
}

TEST(Smooth, ReducesWhiteNoiseVariance) {
  Rng rng(4);
  SkeletonSequence s = constant_sequence(10000);
  for (auto& f : s.frames) f[kRWrist].x = rng.normal(0.0, 0.05);
  const auto out = smooth(s);
  auto variance = [](const SkeletonSequence& q) {
    double m = 0.0;
    for (const auto& f : q.frames) m += f[kRWrist].x;
    m /= static_cast<double>(q.frames.size());
    double v = 0.0;
    for (const auto& f : q.frames) v += (f[kRWrist].x - m) * (f[kRWrist].x - m);
    return v / static_cast<double>(q.frames.size());
  };
  // EMA with weight 0.5 keeps 0.5/(2-0.5) = 1/3 of white-noise variance.
  EXPECT_LT(variance(out), variance(s));
  EXPECT_NEAR(variance(out) / variance(s), 1.0 / 3.0, 0.03);
}

TEST(Stabilize, CleanConstantUnchanged) {
  const auto c = constant_sequence(24);
  EXPECT_EQ(stabilize(c), c);
}

TEST(Stabilize, HalvesDegradationError) {
  Rng rng(11);
  double before = 0.0;
  double after = 0.0;
  for (std::uint64_t i = 0; i < 60; ++i) {
    const auto d = simulate_degradation(noisy_gesture(i), 0.1, 0.05, rng);
    const auto fixed = stabilize(d.degraded);
    EXPECT_EQ(fixed.missing_count(), 0u);
    EXPECT_TRUE(is_model_ready(prepare_for_model(fixed)));
    for (const auto& f : fixed.frames) {
      for (const auto& p : f.joints) EXPECT_TRUE(std::isfinite(p.x) && std::isfinite(p.y));
    }
    before += keypoint_rmse(d.degraded, d.truth);
    after += keypoint_rmse(fixed, d.truth);
  }
  EXPECT_LE(after, 0.5 * before);
}

TEST(Stabilize, ConfigValidation) {
  StabilizerConfig c;
  c.median_window = 4;
  EXPECT_THROW(c.validate(), ArgumentError);
  c.median_window = 5;
  c.smoothing = 0.0;
  EXPECT_THROW(c.validate(), ArgumentError);
}
