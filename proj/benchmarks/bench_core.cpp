#include <benchmark/benchmark.h>

#include <vector>

#include "gesturefx/lstm.hpp"
#include "gesturefx/matrix.hpp"
#include "gesturefx/model.hpp"
#include "gesturefx/stabilizer.hpp"
#include "gesturefx/synth.hpp"

using namespace gesturefx;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

std::vector<Matrix> random_frames(std::size_t steps, std::size_t batch, std::size_t width, Rng& rng) {
  std::vector<Matrix> frames;
  for (std::size_t t = 0; t < steps; ++t) frames.push_back(random_matrix(batch, width, rng));
  return frames;
}

}  // namespace

static void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Matrix a = random_matrix(n, n, rng);
  const Matrix b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.counters["flops"] = benchmark::Counter(static_cast<double>(2 * n * n * n),
                                               benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256)->Arg(512);

// One 256-unit layer over 24 frames of a 32-sample batch.
static void BM_LstmForward(benchmark::State& state) {
  Rng rng(2);
  const auto p = LstmParams::xavier(kFrameWidth, 256, rng);
  const auto frames = random_frames(kSequenceLength, 32, kFrameWidth, rng);
  for (auto _ : state) benchmark::DoNotOptimize(lstm_forward_window(frames, p));
}
BENCHMARK(BM_LstmForward)->Unit(benchmark::kMillisecond);

static void BM_LstmBackward(benchmark::State& state) {
  Rng rng(3);
  const auto p = LstmParams::xavier(kFrameWidth, 256, rng);
  const auto frames = random_frames(kSequenceLength, 32, kFrameWidth, rng);
  const auto fwd = lstm_forward_window(frames, p);
  const Matrix dh = random_matrix(32, 256, rng);
  for (auto _ : state) benchmark::DoNotOptimize(lstm_backward_window(fwd.tape, dh, p));
}
BENCHMARK(BM_LstmBackward)->Unit(benchmark::kMillisecond);

// Full seven-network model on a batch; threads as the argument.
static void BM_EnsembleForward(benchmark::State& state) {
  Rng rng(4);
  const Model m = build_ensemble(rng);
  std::vector<Matrix> samples;
  for (int i = 0; i < 32; ++i) samples.push_back(random_matrix(kSequenceLength, kFrameWidth, rng));
  const auto frames = batch_frames(samples, kSequenceLength, kFrameWidth);
  ForwardOptions opts;
  opts.threads = static_cast<std::size_t>(state.range(0));
  Rng none(0);
  for (auto _ : state) benchmark::DoNotOptimize(model_forward(frames, m, none, opts));
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_EnsembleForward)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_EnsembleTrainStep(benchmark::State& state) {
  Rng rng(5);
  const Model m = build_ensemble(rng);
  Model grads = Model::zeros_like(m);
  std::vector<Matrix> samples;
  std::vector<std::size_t> labels;
  for (int i = 0; i < 32; ++i) {
    samples.push_back(random_matrix(kSequenceLength, kFrameWidth, rng));
    labels.push_back(static_cast<std::size_t>(i) % kClassCount);
  }
  const auto frames = batch_frames(samples, kSequenceLength, kFrameWidth);
  ForwardOptions opts;
  opts.training = true;
  for (auto _ : state) {
    const auto tape = model_forward(frames, m, rng, opts);
    benchmark::DoNotOptimize(model_backward(tape, labels, m, grads));
  }
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_EnsembleTrainStep)->Unit(benchmark::kMillisecond);

static void BM_Stabilize(benchmark::State& state) {
  Rng rng(6);
  GestureSpec g;
  g.label = 0;
  g.rhythm = 0.5;  // 48 frames
  g.noise = 0.02;
  const auto d = simulate_degradation(synth_gesture(g), 0.1, 0.05, rng);
  for (auto _ : state) benchmark::DoNotOptimize(stabilize(d.degraded));
}
BENCHMARK(BM_Stabilize)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
