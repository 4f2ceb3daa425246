#include "gesturefx/stabilizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gesturefx/error.hpp"

namespace gesturefx {
namespace {

void require_complete(const SkeletonSequence& seq, const char* op) {
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      if (seq.frames[t][j].missing) {
        throw PreconditionError(std::string(op) + ": joint " + std::string(joint_name(j)) +
                                " missing in frame " + std::to_string(t) + "; run fill_gaps first");
      }
    }
  }
}

double median_of(std::vector<double>& values) {
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

// One pass over a channel; returns true if anything was replaced.
bool despike_channel(std::vector<double>& channel, std::size_t half, double threshold) {
  const std::vector<double> source = channel;
  const std::size_t n = source.size();
  std::vector<double> window;
  bool changed = false;
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t lo = t >= half ? t - half : 0;
    const std::size_t hi = std::min(n - 1, t + half);
    window.assign(source.begin() + static_cast<std::ptrdiff_t>(lo),
                  source.begin() + static_cast<std::ptrdiff_t>(hi + 1));
    const double med = median_of(window);
    if (std::abs(source[t] - med) > threshold) {
      channel[t] = med;
      changed = true;
    }
  }
  return changed;
}

}  // namespace

void StabilizerConfig::validate() const {
  if (median_window < 3 || median_window % 2 == 0) {
    throw ArgumentError("median window must be odd and >= 3");
  }
  if (!(spike_threshold > 0.0)) throw ArgumentError("spike threshold must be positive");
  if (!(smoothing > 0.0 && smoothing <= 1.0)) throw ArgumentError("smoothing must lie in (0, 1]");
  if (max_gap == 0) throw ArgumentError("max gap must be positive");
}

SkeletonSequence fill_gaps(const SkeletonSequence& seq, const StabilizerConfig& cfg) {
  cfg.validate();
  SkeletonSequence out = seq;
  const std::size_t n = seq.frames.size();
  for (std::size_t j = 0; j < kJointCount; ++j) {
    std::vector<std::size_t> observed;
    for (std::size_t t = 0; t < n; ++t) {
      if (!seq.frames[t][j].missing) observed.push_back(t);
    }
    if (observed.size() == n) continue;
    if (observed.empty()) {
      throw GapError("joint " + std::string(joint_name(j)) + " is never observed");
    }
    if (observed.size() < 2) {
      throw GapError("joint " + std::string(joint_name(j)) + " is observed in only one frame");
    }
    const Keypoint first = seq.frames[observed.front()][j];
    const Keypoint last = seq.frames[observed.back()][j];
    if (observed.front() > cfg.max_gap) {
      throw GapError("joint " + std::string(joint_name(j)) + " missing in frames 0.." +
                     std::to_string(observed.front() - 1) + ", longer than max gap " +
                     std::to_string(cfg.max_gap));
    }
    if (n - 1 - observed.back() > cfg.max_gap) {
      throw GapError("joint " + std::string(joint_name(j)) + " missing in frames " +
                     std::to_string(observed.back() + 1) + ".." + std::to_string(n - 1) +
                     ", longer than max gap " + std::to_string(cfg.max_gap));
    }
    for (std::size_t t = 0; t < observed.front(); ++t) out.frames[t][j] = first;
    for (std::size_t t = observed.back() + 1; t < n; ++t) out.frames[t][j] = last;
    for (std::size_t k = 0; k + 1 < observed.size(); ++k) {
      const std::size_t a = observed[k];
      const std::size_t b = observed[k + 1];
      if (b == a + 1) continue;
      if (b - a - 1 > cfg.max_gap) {
        throw GapError("joint " + std::string(joint_name(j)) + " missing in frames " +
                       std::to_string(a + 1) + ".." + std::to_string(b - 1) +
                       ", longer than max gap " + std::to_string(cfg.max_gap));
      }
      const Keypoint& pa = seq.frames[a][j];
      const Keypoint& pb = seq.frames[b][j];
      for (std::size_t t = a + 1; t < b; ++t) {
        const double w = static_cast<double>(t - a) / static_cast<double>(b - a);
        out.frames[t][j] = Keypoint{(1.0 - w) * pa.x + w * pb.x, (1.0 - w) * pa.y + w * pb.y,
                                    (1.0 - w) * pa.confidence + w * pb.confidence, false};
      }
    }
  }
  return out;
}

SkeletonSequence despike(const SkeletonSequence& seq, const StabilizerConfig& cfg) {
  cfg.validate();
  require_complete(seq, "despike");
  SkeletonSequence out = seq;
  const std::size_t n = seq.frames.size();
  if (n < 2) return out;
  const std::size_t half = cfg.median_window / 2;
  std::vector<double> channel(n);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    for (int axis = 0; axis < 2; ++axis) {
      for (std::size_t t = 0; t < n; ++t) {
        channel[t] = axis == 0 ? seq.frames[t][j].x : seq.frames[t][j].y;
      }
      // Each pass only moves values onto window medians; a pass bound keeps
      // pathological inputs finite.
      for (std::size_t pass = 0; pass < 4 * n; ++pass) {
        if (!despike_channel(channel, half, cfg.spike_threshold)) break;
      }
      for (std::size_t t = 0; t < n; ++t) {
        (axis == 0 ? out.frames[t][j].x : out.frames[t][j].y) = channel[t];
      }
    }
  }
  return out;
}

SkeletonSequence smooth(const SkeletonSequence& seq, const StabilizerConfig& cfg) {
  cfg.validate();
  require_complete(seq, "smooth");
  SkeletonSequence out = seq;
  for (std::size_t t = 1; t < seq.frames.size(); ++t) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const Keypoint& x = seq.frames[t][j];
      const Keypoint& prev = out.frames[t - 1][j];
      const double beta = cfg.smoothing * x.confidence;
      out.frames[t][j].x = (1.0 - beta) * prev.x + beta * x.x;
      out.frames[t][j].y = (1.0 - beta) * prev.y + beta * x.y;
    }
  }
  return out;
}

SkeletonSequence stabilize(const SkeletonSequence& seq, const StabilizerConfig& cfg) {
  return smooth(despike(fill_gaps(seq, cfg), cfg), cfg);
}

double keypoint_rmse(const SkeletonSequence& a, const SkeletonSequence& b) {
  if (a.frames.size() != b.frames.size() || a.frames.empty()) {
    throw DimensionError("keypoint_rmse: sequences differ in length or are empty");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < a.frames.size(); ++t) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const double dx = a.frames[t][j].x - b.frames[t][j].x;
      const double dy = a.frames[t][j].y - b.frames[t][j].y;
      total += dx * dx + dy * dy;
    }
  }
  return std::sqrt(total / static_cast<double>(a.frames.size() * kJointCount));
}

}  // namespace gesturefx
