#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gesturefx/model.hpp"
#include "gesturefx/skeleton.hpp"

namespace gesturefx {

struct EffectBinding {
  std::string effect;
  std::size_t anchor_joint = 0;

  friend bool operator==(const EffectBinding&, const EffectBinding&) = default;
};

struct TriggerConfig {
  std::size_t hop = 6;           // frames between window starts
  double threshold = 0.8;        // minimum confidence per supporting window
  std::size_t consecutive = 2;   // windows that must agree
  std::size_t refractory = 24;   // frames before the same action may fire again
  // Effect per class; classes without a binding never fire.
  std::array<std::optional<EffectBinding>, kClassCount> effects = {
      EffectBinding{"sparkle_trail", kRWrist},
      EffectBinding{"energy_burst", kNeck},
      EffectBinding{"ground_shockwave", kRAnkle},
      std::nullopt,
  };

  void validate() const;
};

struct WindowResult {
  std::size_t end_frame = 0;  // index of the window's last frame
  double time_s = 0.0;        // timestamp of that frame
  std::size_t label = 0;
  double confidence = 0.0;
};

struct VfxEvent {
  double t_start_s = 0.0;
  std::size_t action = 0;
  double confidence = 0.0;
  std::string effect;
  std::size_t anchor_joint = 0;

  friend bool operator==(const VfxEvent&, const VfxEvent&) = default;
};

struct VfxTimeline {
  std::string stream_id;
  double fps = 30.0;
  std::vector<VfxEvent> events;

  friend bool operator==(const VfxTimeline&, const VfxTimeline&) = default;
};

// Classifies every 24-frame window starting at 0, hop, 2*hop, ... of a
// stabilized stream. Each window is normalized before prediction.
std::vector<WindowResult> stream_infer(const SkeletonSequence& stream, const Model& model,
                                       const TriggerConfig& cfg, std::size_t threads = 1);

// Fires an event when the same bound class wins `consecutive` windows in a
// row, each at confidence >= threshold. The event is stamped at the last
// supporting window. A class that fired less than `refractory` frames ago is
// suppressed. The supporting run restarts after every trigger decision.
VfxTimeline emit_timeline(const std::vector<WindowResult>& windows, const TriggerConfig& cfg,
                          double fps, std::string stream_id = "stream");

// {"stream_id": str, "fps": num, "events": [{"t_start_s": num, "action": str,
//   "confidence": num, "effect": str, "anchor_joint": int}]}
void write_timeline(std::ostream& out, const VfxTimeline& tl);
VfxTimeline read_timeline(std::istream& in);
void write_timeline(const VfxTimeline& tl, const std::filesystem::path& path);
VfxTimeline read_timeline(const std::filesystem::path& path);

}  // namespace gesturefx
