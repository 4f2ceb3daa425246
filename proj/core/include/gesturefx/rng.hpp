#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gesturefx {

// Seeded random stream. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; uniform and normal draws are derived here rather
// than through <random> distributions so results agree across standard
// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  bool bernoulli(double p) { return uniform() < p; }

  // Independent child stream. Depends only on this stream's seed and the
  // label, never on how many draws were already taken.
  Rng split(std::string_view label) const;
  Rng split(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// SplitMix64 finalizer, used to derive child seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace gesturefx
