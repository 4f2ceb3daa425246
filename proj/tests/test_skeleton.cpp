#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "gesturefx/error.hpp"
#include "gesturefx/skeleton.hpp"
#include "gesturefx/synth.hpp"
#include "support.hpp"

using namespace gesturefx;
using gfx_test::ramp_sequence;

namespace {

SkeletonSequence transform(SkeletonSequence s, double scale, double dx, double dy) {
  for (auto& f : s.frames) {
    for (auto& p : f.joints) {
      p.x = p.x * scale + dx;
      p.y = p.y * scale + dy;
    }
  }
  return s;
}

void expect_close(const SkeletonSequence& a, const SkeletonSequence& b, double tol) {
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t t = 0; t < a.frames.size(); ++t) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      EXPECT_NEAR(a.frames[t][j].x, b.frames[t][j].x, tol) << "t=" << t << " j=" << j;
      EXPECT_NEAR(a.frames[t][j].y, b.frames[t][j].y, tol) << "t=" << t << " j=" << j;
    }
  }
}

SkeletonSequence wave_clip(std::uint64_t seed = 3) {
  GestureSpec g;
  g.label = 0;
  g.noise = 0.01;
  g.seed = seed;
  return synth_gesture(g);
}

}  // namespace

TEST(Tensor, LayoutIsXYInterleaved) {
  const auto s = ramp_sequence(24);
  const Matrix m = to_tensor(s);
  ASSERT_EQ(m.rows(), 24u);
  ASSERT_EQ(m.cols(), 36u);
  for (std::size_t t = 0; t < 24; ++t) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      EXPECT_EQ(m(t, 2 * j), s.frames[t][j].x);
      EXPECT_EQ(m(t, 2 * j + 1), s.frames[t][j].y);
    }
  }
  EXPECT_TRUE(is_model_ready(s));
  EXPECT_FALSE(is_model_ready(ramp_sequence(23)));
}

TEST(Normalize, NeckOriginUnitTorso) {
  const auto n = normalize(wave_clip());
  for (const auto& f : n.frames) {
    EXPECT_NEAR(f[kNeck].x, 0.0, 1e-15);
    EXPECT_NEAR(f[kNeck].y, 0.0, 1e-15);
    const double mx = 0.5 * (f[kRHip].x + f[kLHip].x);
    const double my = 0.5 * (f[kRHip].y + f[kLHip].y);
    EXPECT_NEAR(std::hypot(mx, my), 1.0, 1e-12);
  }
}

TEST(Normalize, TranslationScaleInvarianceAndIdempotence) {
  const auto s = wave_clip(5);
  const auto n = normalize(s);
  expect_close(normalize(transform(s, 1.0, 0.3, -0.2)), n, 1e-12);
  expect_close(normalize(transform(s, 2.0, 0.0, 0.0)), n, 1e-12);
  expect_close(normalize(n), n, 1e-12);
}

TEST(Normalize, Errors) {
  auto s = ramp_sequence(3);
  for (auto& f : s.frames) {
    f[kRHip] = f[kNeck];
    f[kLHip] = f[kNeck];
  }
  EXPECT_THROW(normalize(s), DegeneratePoseError);
  auto m = ramp_sequence(3);
  m.frames[1][kNeck] = Keypoint{0, 0, 0, true};
  EXPECT_THROW(normalize(m), PreconditionError);
}

TEST(Resample, TwentyFourIsIdentity) {
  const auto s = ramp_sequence(24);
  EXPECT_EQ(resample_to_24(s), s);
}

TEST(Resample, ConstantStaysConstant) {
  const auto s = ramp_sequence(48, 0.0);
  const auto r = resample_to_24(s);
  ASSERT_EQ(r.frames.size(), 24u);
  for (const auto& f : r.frames) EXPECT_EQ(f, s.frames[0]);
}

TEST(Resample, LinearRampClosedForm) {
  auto s = ramp_sequence(30, 0.0);
  for (std::size_t t = 0; t < 30; ++t) s.frames[t][kRWrist].x = static_cast<double>(t) / 29.0;
  const auto r = resample_to_24(s);
  // Sample k lands at original time 29k/23; x(t) = t/29 there is k/23.
  for (std::size_t k = 0; k < 24; ++k) {
    EXPECT_NEAR(r.frames[k][kRWrist].x, static_cast<double>(k) / 23.0, 1e-12);
  }
  EXPECT_NEAR(r.frames.front()[kRWrist].x, 0.0, 1e-12);
  EXPECT_NEAR(r.frames.back()[kRWrist].x, 1.0, 1e-12);
}

TEST(Resample, Errors) {
  EXPECT_THROW(resample_to_24(ramp_sequence(1)), ArgumentError);
  auto s = ramp_sequence(10);
  s.frames[4][kLKnee] = Keypoint{0, 0, 0, true};
  EXPECT_THROW(resample_to_24(s), PreconditionError);
}

TEST(Jsonl, RoundTripAndEmpty) {
  auto corpus = flatten(make_corpus({.per_class = 3, .seed = 4}));
  corpus[0].label.reset();
  corpus[1].frames[2][kNose] = Keypoint{0.0, 0.0, 0.0, true};
  std::stringstream ss;
  write_jsonl(ss, corpus);
  EXPECT_EQ(read_jsonl(ss), corpus);
  std::stringstream empty;
  EXPECT_TRUE(read_jsonl(empty).empty());
}

TEST(Jsonl, SeventeenJointsIsSchemaErrorWithLine) {
  std::stringstream ss;
  write_jsonl(ss, {ramp_sequence(2)});
  std::string good = ss.str();
  std::string kp17 = "{\"id\":\"x\",\"label\":null,\"fps\":30,\"frames\":[{\"kp\":[";
  for (int j = 0; j < 17; ++j) kp17 += std::string(j ? "," : "") + "[0.1,0.2,1,0]";
  kp17 += "]}]}\n";
  std::stringstream bad(good + kp17);
  try {
    read_jsonl(bad);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Jsonl, MalformedLineIsParseErrorWithLine) {
  std::stringstream bad("\n{\"id\": \"a\", \n");
  try {
    read_jsonl(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Synth, IdleNoiselessIsBasePose) {
  GestureSpec g;
  g.label = 3;
  g.rhythm = 1.3;
  const auto s = synth_gesture(g);
  EXPECT_EQ(s.frames.size(), static_cast<std::size_t>(std::lround(24 / 1.3)));
  for (const auto& f : s.frames) EXPECT_EQ(f.joints, base_pose());
  EXPECT_EQ(base_pose_version(), 1);
}

TEST(Synth, WaveCompletesTwoCyclesAndAnklesStill) {
  GestureSpec g;
  g.label = 0;
  const auto s = synth_gesture(g);
  ASSERT_EQ(s.frames.size(), 24u);
  const double center = s.frames[0][kRWrist].x;
  // Oracle: x(u) = c + 0.06 sin(2 pi * 2 * u) for r = 1 and no jitter.
  std::size_t sign_changes = 0;
  for (std::size_t n = 0; n < 24; ++n) {
    const double u = static_cast<double>(n) / 23.0;
    const double want = std::sin(4.0 * std::numbers::pi * u);
    EXPECT_NEAR(s.frames[n][kRWrist].x - center, 0.06 * want, 1e-12) << n;
    if (n > 0 && (s.frames[n][kRWrist].x - center) * (s.frames[n - 1][kRWrist].x - center) < 0) {
      ++sign_changes;
    }
    EXPECT_EQ(s.frames[n][kRAnkle], base_pose()[kRAnkle]);
    EXPECT_EQ(s.frames[n][kLAnkle], base_pose()[kLAnkle]);
    EXPECT_LT(s.frames[n][kRWrist].y, base_pose()[kRShoulder].y);
  }
  // Two full cycles cross the centre three times between the end points.
  EXPECT_EQ(sign_changes, 3u);
  EXPECT_NEAR(s.frames[23][kRWrist].x, center, 1e-12);
}

TEST(Synth, RaiseIsMonotoneAndSquatReturns) {
  GestureSpec g;
  g.label = 1;
  g.rhythm = 0.7;
  const auto r = synth_gesture(g);
  for (std::size_t t = 1; t < r.frames.size(); ++t) {
    EXPECT_LE(r.frames[t][kRWrist].y, r.frames[t - 1][kRWrist].y);
    EXPECT_LE(r.frames[t][kLWrist].y, r.frames[t - 1][kLWrist].y);
  }
  EXPECT_LT(r.frames.back()[kRWrist].y, base_pose()[kNose].y);
  g.label = 2;
  const auto q = synth_gesture(g);
  EXPECT_NEAR(q.frames.front()[kRHip].y, base_pose()[kRHip].y, 1e-12);
  EXPECT_NEAR(q.frames.back()[kRHip].y, base_pose()[kRHip].y, 1e-12);
  double deepest = 0.0;
  for (const auto& f : q.frames) deepest = std::max(deepest, f[kRHip].y - base_pose()[kRHip].y);
  EXPECT_GT(deepest, 0.05);
  for (const auto& f : q.frames) EXPECT_EQ(f[kRWrist], base_pose()[kRWrist]);
}

TEST(Synth, DeterministicAndValidated) {
  GestureSpec g{.label = 2, .rhythm = 1.7, .noise = 0.02, .amplitude_jitter = 0.1, .seed = 99};
  EXPECT_EQ(synth_gesture(g), synth_gesture(g));
  g.label = 4;
  EXPECT_THROW(synth_gesture(g), ArgumentError);
  g.label = 0;
  g.rhythm = 2.5;
  EXPECT_THROW(synth_gesture(g), ArgumentError);
}

TEST(Corpus, SizesSplitAndDisjointIds) {
  const auto c = make_corpus({});
  EXPECT_EQ(c.train.size(), 800u);
  EXPECT_EQ(c.test.size(), 200u);
  std::array<std::size_t, 4> train_counts{};
  std::array<std::size_t, 4> test_counts{};
  for (const auto& s : c.train) ++train_counts[*s.label];
  for (const auto& s : c.test) ++test_counts[*s.label];
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(train_counts[k], 200u);
    EXPECT_EQ(test_counts[k], 50u);
  }
  std::set<std::string> ids;
  for (const auto& s : c.train) ids.insert(s.id);
  for (const auto& s : c.test) EXPECT_EQ(ids.count(s.id), 0u) << s.id;
  EXPECT_EQ(ids.size(), 800u);
}

TEST(Corpus, WristVarianceSeparatesWaveFromIdle) {
  const auto all = flatten(make_corpus({.per_class = 50, .seed = 21}));
  double min_wave = 1e9;
  double max_idle = 0.0;
  for (const auto& s : all) {
    if (*s.label == 0) min_wave = std::min(min_wave, wrist_variance(s));
    if (*s.label == 3) max_idle = std::max(max_idle, wrist_variance(s));
  }
  EXPECT_GT(min_wave, max_idle);
}

TEST(Corpus, TemplateStatisticIsLabelFaithful) {
  Rng rng(17);
  std::size_t correct = 0;
  const std::size_t n = 400;
  for (std::size_t i = 0; i < n; ++i) {
    GestureSpec g;
    g.label = i % 4;
    g.rhythm = rng.uniform(kMinRhythm, kMaxRhythm);
    g.amplitude_jitter = 0.1;
    g.seed = i;
    if (template_classify(synth_gesture(g)) == g.label) ++correct;
  }
  EXPECT_GE(static_cast<double>(correct) / n, 0.99);
}

TEST(Degradation, ZeroRatesIdentityAndSeeded) {
  const auto s = wave_clip();
  Rng r0(1);
  EXPECT_EQ(simulate_degradation(s, 0.0, 0.0, r0).degraded, s);
  Rng a(5);
  Rng b(5);
  const auto da = simulate_degradation(s, 0.1, 0.05, a);
  const auto db = simulate_degradation(s, 0.1, 0.05, b);
  EXPECT_EQ(da.dropped, db.dropped);
  EXPECT_EQ(da.spiked, db.spiked);
  EXPECT_EQ(da.degraded, db.degraded);
  EXPECT_EQ(da.truth, s);
}

TEST(Degradation, DropFraction) {
  Rng rng(8);
  std::size_t dropped = 0;
  std::size_t total = 0;
  while (total < 100000) {
    const auto d = simulate_degradation(ramp_sequence(50), 0.1, 0.0, rng);
    for (std::size_t t = 0; t < d.degraded.frames.size(); ++t) {
      for (std::size_t j = 0; j < kJointCount; ++j) {
        const auto& p = d.degraded.frames[t][j];
        EXPECT_EQ(p.missing, d.dropped[t][j]);
        if (p.missing) {
          EXPECT_EQ(p.confidence, 0.0);
          ++dropped;
        }
        ++total;
      }
    }
  }
  EXPECT_NEAR(static_cast<double>(dropped) / static_cast<double>(total), 0.1, 0.01);
}
