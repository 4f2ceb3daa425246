#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gesturefx/matrix.hpp"

namespace gesturefx {

inline constexpr std::size_t kJointCount = 18;

// COCO-18 body layout as emitted by OpenPose.
enum Joint : std::size_t {
  kNose = 0,
  kNeck = 1,
  kRShoulder = 2,
  kRElbow = 3,
  kRWrist = 4,
  kLShoulder = 5,
  kLElbow = 6,
  kLWrist = 7,
  kRHip = 8,
  kRKnee = 9,
  kRAnkle = 10,
  kLHip = 11,
  kLKnee = 12,
  kLAnkle = 13,
  kREye = 14,
  kLEye = 15,
  kREar = 16,
  kLEar = 17,
};

std::string_view joint_name(std::size_t joint);

// A missing keypoint carries confidence 0; its coordinates are meaningless.
struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 1.0;
  bool missing = false;

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct KeypointFrame {
  std::array<Keypoint, kJointCount> joints{};

  Keypoint& operator[](std::size_t j) { return joints[j]; }
  const Keypoint& operator[](std::size_t j) const { return joints[j]; }
  friend bool operator==(const KeypointFrame&, const KeypointFrame&) = default;
};

struct SkeletonSequence {
  std::string id;
  std::vector<KeypointFrame> frames;
  double fps = 30.0;
  std::optional<std::size_t> label;

  std::size_t size() const { return frames.size(); }
  std::size_t missing_count() const;
  friend bool operator==(const SkeletonSequence&, const SkeletonSequence&) = default;
};

// 24 frames and no missing joints.
bool is_model_ready(const SkeletonSequence& seq);

// T x 36 tensor laid out [x0, y0, x1, y1, ..., x17, y17] per frame. Throws
// PreconditionError if any joint is missing.
Matrix to_tensor(const SkeletonSequence& seq);

// Per frame: translate so the neck is the origin and scale so the distance
// from the neck to the hip midpoint is 1.
SkeletonSequence normalize(const SkeletonSequence& seq);

// Linear interpolation of every joint channel onto `frame_count` uniformly
// spaced instants spanning the original duration.
SkeletonSequence resample(const SkeletonSequence& seq, std::size_t frame_count);
SkeletonSequence resample_to_24(const SkeletonSequence& seq);

// resample_to_24 followed by normalize; the model input for one clip.
SkeletonSequence prepare_for_model(const SkeletonSequence& seq);

// JSONL corpus: one object per line,
//   {"id": str, "label": int|null, "fps": num, "frames": [{"kp": [[x,y,conf,missing] x18]}]}
std::vector<SkeletonSequence> read_jsonl(std::istream& in);
void write_jsonl(std::ostream& out, const std::vector<SkeletonSequence>& seqs);
std::vector<SkeletonSequence> load_jsonl(const std::filesystem::path& path);
void save_jsonl(const std::vector<SkeletonSequence>& seqs, const std::filesystem::path& path);

}  // namespace gesturefx
