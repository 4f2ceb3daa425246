#pragma once

#include <cstddef>

#include "gesturefx/skeleton.hpp"

namespace gesturefx {

// Keypoint-trajectory cleanup applied before recognition: bridge dropped
// keypoints, reject single-frame impulses, then smooth jitter.
struct StabilizerConfig {
  std::size_t median_window = 5;  // odd, >= 3
  double spike_threshold = 0.15;  // image units
  double smoothing = 0.5;         // alpha in (0, 1]
  std::size_t max_gap = 6;        // frames

  void validate() const;
};

// Interior runs of missing frames up to max_gap are linearly interpolated per
// channel (confidence included); leading and trailing runs hold the nearest
// observed keypoint. Observed keypoints are never modified.
SkeletonSequence fill_gaps(const SkeletonSequence& seq, const StabilizerConfig& cfg = {});

// Per channel, a value further than spike_threshold from the median of its
// (edge-truncated) window is replaced by that median. Passes repeat until
// nothing changes, so the result is a fixed point.
SkeletonSequence despike(const SkeletonSequence& seq, const StabilizerConfig& cfg = {});

// s_t = (1 - b_t) s_{t-1} + b_t x_t with b_t = alpha * confidence_t, s_0 = x_0.
SkeletonSequence smooth(const SkeletonSequence& seq, const StabilizerConfig& cfg = {});

// fill_gaps -> despike -> smooth.
SkeletonSequence stabilize(const SkeletonSequence& seq, const StabilizerConfig& cfg = {});

// Root-mean-square keypoint displacement between two equally long sequences,
// over every joint of every frame. Missing keypoints count with whatever
// coordinates they carry.
double keypoint_rmse(const SkeletonSequence& a, const SkeletonSequence& b);

}  // namespace gesturefx
