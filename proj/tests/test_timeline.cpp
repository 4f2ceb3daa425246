#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "gesturefx/error.hpp"
#include "gesturefx/synth.hpp"
#include "gesturefx/timeline.hpp"
#include "gesturefx/training.hpp"
#include "support.hpp"
#include "trigger_props.hpp"

using namespace gesturefx;

namespace {

Model reduced(std::uint64_t seed) {
  Rng rng(seed);
  return Model::build(model_spec(Variant::kItsLstm, 8, 2), rng);
}

// Zero network with a bias that always picks `label`.
Model constant_model(std::size_t label) {
  Model m = Model::zeros_like(reduced(1));
  m.head_b.back()(0, label) = 10.0;
  return m;
}

WindowResult window(std::size_t end, std::size_t label, double conf, double fps = 30.0) {
  return {end, static_cast<double>(end) / fps, label, conf};
}

// End frames 23, 29, 35, ... as produced with hop 6.
std::vector<WindowResult> hop6(const std::vector<std::pair<std::size_t, double>>& seq) {
  std::vector<WindowResult> out;
  for (std::size_t i = 0; i < seq.size(); ++i) out.push_back(window(23 + 6 * i, seq[i].first, seq[i].second));
  return out;
}

}  // namespace

TEST(StreamInfer, WindowCounts) {
  const Model m = reduced(3);
  TriggerConfig cfg;
  for (std::size_t hop : {1u, 6u, 100u}) {
    cfg.hop = hop;
    EXPECT_EQ(stream_infer(gfx_test::ramp_sequence(24), m, cfg).size(), 1u) << hop;
  }
  cfg.hop = 6;
  const auto w = stream_infer(gfx_test::ramp_sequence(48), m, cfg);
  ASSERT_EQ(w.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(w[i].end_frame, 6 * i + 23);
    EXPECT_DOUBLE_EQ(w[i].time_s, static_cast<double>(6 * i + 23) / 30.0);
  }
  cfg.hop = 5;
  EXPECT_EQ(stream_infer(gfx_test::ramp_sequence(50), m, cfg).size(), 6u);  // starts 0..25
}

TEST(StreamInfer, WindowMatchesDirectPrediction) {
  const Model m = reduced(4);
  auto stream = gfx_test::ramp_sequence(40, 0.004);
  TriggerConfig cfg;
  cfg.hop = 8;
  const auto w = stream_infer(stream, m, cfg, 2);
  ASSERT_EQ(w.size(), 3u);
  SkeletonSequence clip = stream;
  clip.frames.assign(stream.frames.begin() + 8, stream.frames.begin() + 32);
  const auto p = predict(to_tensor(normalize(clip)), m);
  EXPECT_EQ(w[1].label, p.label);
  EXPECT_EQ(w[1].confidence, p.confidence);
}

TEST(StreamInfer, ShortStreamIsArgumentError) {
  EXPECT_THROW(stream_infer(gfx_test::ramp_sequence(23), reduced(1), {}), ArgumentError);
}

TEST(StreamInfer, IdleStreamGivesNoEvents) {
  GestureSpec spec;
  spec.label = 3;
  auto stream = synth_gesture(spec);
  const auto one = stream.frames;
  for (int i = 0; i < 4; ++i) stream.frames.insert(stream.frames.end(), one.begin(), one.end());
  const auto w = stream_infer(stream, constant_model(3), {});
  EXPECT_EQ(w.size(), 17u);
  for (const auto& r : w) EXPECT_EQ(r.label, 3u);
  EXPECT_TRUE(emit_timeline(w, {}, stream.fps).events.empty());
}

TEST(Emit, AllIdleIsEmpty) {
  const auto w = hop6({{3, 0.99}, {3, 0.99}, {3, 0.99}, {3, 0.99}});
  EXPECT_TRUE(emit_timeline(w, {}, 30.0).events.empty());
}

TEST(Emit, TwoConfidentWavesFireOnce) {
  const auto w = hop6({{0, 0.9}, {0, 0.9}});
  const auto tl = emit_timeline(w, {}, 30.0, "s1");
  ASSERT_EQ(tl.events.size(), 1u);
  const auto& e = tl.events[0];
  EXPECT_DOUBLE_EQ(e.t_start_s, 29.0 / 30.0);
  EXPECT_EQ(e.action, 0u);
  EXPECT_EQ(e.confidence, 0.9);
  EXPECT_EQ(e.effect, "sparkle_trail");
  EXPECT_EQ(e.anchor_joint, static_cast<std::size_t>(kRWrist));
  EXPECT_EQ(tl.stream_id, "s1");
}

TEST(Emit, AlternatingClassesNeverFire) {
  const auto w = hop6({{0, 0.95}, {2, 0.95}, {0, 0.95}, {2, 0.95}, {0, 0.95}, {2, 0.95}});
  EXPECT_TRUE(emit_timeline(w, {}, 30.0).events.empty());
}

TEST(Emit, BelowThresholdBreaksTheRun) {
  EXPECT_TRUE(emit_timeline(hop6({{1, 0.9}, {1, 0.79}, {1, 0.9}}), {}, 30.0).events.empty());
  EXPECT_EQ(emit_timeline(hop6({{1, 0.8}, {1, 0.8}}), {}, 30.0).events.size(), 1u);
}

TEST(Emit, RefractoryOracle) {
  // Ends 23,29,...,71. Fires at 29; the pair (35,41) is suppressed since
  // 41-29 < 24 and the run restarts; (47,53) fires at 53 = 29+24; (59,65) is
  // suppressed; 71 starts a run that never completes.
  std::vector<std::pair<std::size_t, double>> seq(9, {0, 0.95});
  const auto tl = emit_timeline(hop6(seq), {}, 30.0);
  ASSERT_EQ(tl.events.size(), 2u);
  EXPECT_DOUBLE_EQ(tl.events[0].t_start_s, 29.0 / 30.0);
  EXPECT_DOUBLE_EQ(tl.events[1].t_start_s, 53.0 / 30.0);
}

TEST(Emit, RefractoryIsPerClass) {
  const auto tl = emit_timeline(hop6({{0, 0.9}, {0, 0.9}, {2, 0.9}, {2, 0.9}}), {}, 30.0);
  ASSERT_EQ(tl.events.size(), 2u);
  EXPECT_EQ(tl.events[1].action, 2u);
  EXPECT_EQ(tl.events[1].effect, "ground_shockwave");
}

TEST(Emit, SingleWindowTrigger) {
  TriggerConfig cfg;
  cfg.consecutive = 1;
  cfg.refractory = 0;
  const auto tl = emit_timeline(hop6({{1, 0.9}, {1, 0.9}, {3, 1.0}}), cfg, 30.0);
  EXPECT_EQ(tl.events.size(), 2u);
}

TEST(Emit, ConfigValidation) {
  TriggerConfig cfg;
  cfg.hop = 0;
  EXPECT_THROW(emit_timeline({}, cfg, 30.0), ArgumentError);
  cfg = {};
  cfg.threshold = 0.0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg.threshold = 1.01;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.consecutive = 0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
}

TEST(Emit, PropertiesOnRandomStreams) {
  Rng rng(2024);
  for (int c = 0; c < 2000; ++c) {
    const auto cfg = gfx_test::random_trigger_config(rng);
    const auto w = gfx_test::random_windows(rng, 1 + rng.below(60), cfg.hop, 30.0);
    const auto tl = emit_timeline(w, cfg, 30.0);
    ASSERT_EQ(gfx_test::check_trigger_properties(w, cfg, tl), "") << "case " << c;
    ASSERT_EQ(tl, gfx_test::reference_timeline(w, cfg, 30.0)) << "case " << c;
    ASSERT_EQ(tl, emit_timeline(w, cfg, 30.0));
  }
}

TEST(TimelineIo, RoundTrip) {
  Rng rng(5);
  for (int c = 0; c < 50; ++c) {
    const auto cfg = gfx_test::random_trigger_config(rng);
    const auto w = gfx_test::random_windows(rng, 80, cfg.hop, 25.0);
    const auto tl = emit_timeline(w, cfg, 25.0, "clip-" + std::to_string(c));
    std::stringstream ss;
    write_timeline(ss, tl);
    EXPECT_EQ(read_timeline(ss), tl);
  }
}

TEST(TimelineIo, EmptyTimelineText) {
  VfxTimeline tl;
  tl.stream_id = "idle";
  std::ostringstream out;
  write_timeline(out, tl);
  EXPECT_NE(out.str().find("\"events\": []"), std::string::npos);
  EXPECT_NE(out.str().find("\"stream_id\": \"idle\""), std::string::npos);
  EXPECT_NE(out.str().find("\"fps\": 30.0"), std::string::npos);
}

TEST(TimelineIo, FileRoundTrip) {
  VfxTimeline tl{"f", 30.0, {{0.1, 1, 0.91, "energy_burst", 1}}};
  const auto path = std::filesystem::temp_directory_path() / "gesturefx_tl.json";
  write_timeline(tl, path);
  EXPECT_EQ(read_timeline(path), tl);
  std::filesystem::remove(path);
  EXPECT_THROW(read_timeline(path), IoError);
}

TEST(TimelineIo, SchemaViolations) {
  const auto reject = [](const std::string& text, const std::string& where) {
    std::istringstream in(text);
    try {
      read_timeline(in);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const SchemaError& e) {
      EXPECT_NE(std::string(e.what()).find(where), std::string::npos) << e.what();
    }
  };
  const std::string head = R"({"stream_id":"s","fps":30,"events":[)";
  const std::string ok = R"({"t_start_s":1.0,"action":"wave","confidence":0.9,"effect":"e","anchor_joint":4})";
  reject(head + R"({"t_start_s":-0.5,"action":"wave","confidence":0.9,"effect":"e","anchor_joint":4}]})",
         "events[0].t_start_s");
  reject(head + ok + R"(,{"t_start_s":0.5,"action":"wave","confidence":0.9,"effect":"e","anchor_joint":4}]})",
         "events[1].t_start_s");
  reject(head + R"({"t_start_s":1.0,"action":"jump","confidence":0.9,"effect":"e","anchor_joint":4}]})",
         "events[0].action");
  reject(head + R"({"t_start_s":1.0,"action":"wave","confidence":1.5,"effect":"e","anchor_joint":4}]})",
         "events[0].confidence");
  reject(head + R"({"t_start_s":1.0,"action":"wave","confidence":0.9,"effect":"e","anchor_joint":18}]})",
         "events[0].anchor_joint");
  reject(head + R"({"t_start_s":1.0,"action":"wave","confidence":0.9,"anchor_joint":4}]})",
         "events[0].effect");
  reject(R"({"fps":30,"events":[]})", "stream_id");
  reject(R"({"stream_id":"s","fps":30})", "events");

  std::istringstream bad("{\"stream_id\": ");
  EXPECT_THROW(read_timeline(bad), ParseError);
}

TEST(StreamInfer, WaveStreamMostlyWave) {
  CorpusConfig cc;
  cc.per_class = 100;
  cc.seed = 3;
  const auto corpus = make_corpus(cc);
  const auto train_set = prepare_dataset(corpus.train);
  const auto test_set = prepare_dataset(corpus.test);
  Rng init(1);
  const Model m = Model::build(model_spec(Variant::kItsLstm, 16, 2), init);
  TrainConfig cfg;
  cfg.learning_rate = 3e-3;
  cfg.max_epochs = 30;
  const auto trained = train(m, train_set, {}, cfg, [&](const EpochMetrics&, const Model& cur) {
    return evaluate(cur, test_set).accuracy < 0.95;
  });
  ASSERT_GE(evaluate(trained.model, test_set).accuracy, 0.9);

  SkeletonSequence stream;
  for (std::uint64_t k = 0; k < 6; ++k) {
    GestureSpec g;
    g.label = 0;
    g.noise = 0.01;
    g.seed = k;
    const auto clip = synth_gesture(g);
    stream.frames.insert(stream.frames.end(), clip.frames.begin(), clip.frames.end());
  }
  const auto w = stream_infer(stream, trained.model, {});
  ASSERT_EQ(w.size(), 21u);
  const auto waves = std::count_if(w.begin(), w.end(), [](const WindowResult& r) { return r.label == 0; });
  EXPECT_GT(2 * waves, static_cast<long>(w.size()));
  const auto tl = emit_timeline(w, {}, stream.fps);
  ASSERT_FALSE(tl.events.empty());
  for (const auto& e : tl.events) EXPECT_EQ(e.effect, "sparkle_trail");
}
