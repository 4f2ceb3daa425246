#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gesturefx/rng.hpp"
#include "gesturefx/timeline.hpp"

namespace gfx_test {

using gesturefx::TriggerConfig;
using gesturefx::VfxTimeline;
using gesturefx::WindowResult;

// Random window stream with runs long enough to trigger now and then.
inline std::vector<WindowResult> random_windows(gesturefx::Rng& rng, std::size_t n, std::size_t hop,
                                                double fps) {
  std::vector<WindowResult> out;
  std::size_t label = rng.below(4);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.bernoulli(0.3)) label = rng.below(4);
    const std::size_t end = 23 + i * hop;
    const double conf = rng.bernoulli(0.7) ? rng.uniform(0.7, 1.0) : rng.uniform(0.25, 1.0);
    out.push_back({end, static_cast<double>(end) / fps, label, conf});
  }
  return out;
}

inline TriggerConfig random_trigger_config(gesturefx::Rng& rng) {
  TriggerConfig cfg;
  cfg.hop = 1 + rng.below(12);
  cfg.threshold = rng.uniform(0.5, 1.0);
  cfg.consecutive = 1 + rng.below(4);
  cfg.refractory = rng.below(60);
  return cfg;
}

// Straight transcription of the rule with explicit look-back over the last k
// windows; shares nothing with the streaming implementation.
inline VfxTimeline reference_timeline(const std::vector<WindowResult>& w, const TriggerConfig& cfg,
                                      double fps) {
  VfxTimeline tl;
  tl.stream_id = "stream";
  tl.fps = fps;
  std::vector<long long> last(4, -1);
  std::size_t consumed = 0;  // windows before this index cannot support a new event
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i + 1 < consumed + cfg.consecutive) continue;
    const std::size_t first = i + 1 - cfg.consecutive;
    bool ok = true;
    for (std::size_t j = first; j <= i && ok; ++j) {
      ok = w[j].label == w[i].label && w[j].label < 4 && cfg.effects[w[j].label].has_value() &&
           w[j].confidence >= cfg.threshold;
    }
    if (!ok) continue;
    const long long prev = last[w[i].label];
    if (prev < 0 || static_cast<long long>(w[i].end_frame) - prev >= static_cast<long long>(cfg.refractory)) {
      const auto& b = *cfg.effects[w[i].label];
      tl.events.push_back({w[i].time_s, w[i].label, w[i].confidence, b.effect, b.anchor_joint});
      last[w[i].label] = static_cast<long long>(w[i].end_frame);
    }
    consumed = i + 1;
  }
  return tl;
}

// Empty string when every property holds, otherwise a description.
inline std::string check_trigger_properties(const std::vector<WindowResult>& w,
                                            const TriggerConfig& cfg, const VfxTimeline& tl) {
  std::vector<double> last_time(4, -1.0);
  double previous = 0.0;
  for (std::size_t e = 0; e < tl.events.size(); ++e) {
    const auto& ev = tl.events[e];
    const std::string at = "event " + std::to_string(e) + ": ";
    if (ev.t_start_s < previous) return at + "time decreases";
    previous = ev.t_start_s;
    if (ev.action >= 4 || !cfg.effects[ev.action]) return at + "unbound class fired";
    if (ev.action == 3) return at + "idle fired";
    std::size_t i = 0;
    while (i < w.size() && w[i].time_s != ev.t_start_s) ++i;
    if (i == w.size()) return at + "no window at the event time";
    if (i + 1 < cfg.consecutive) return at + "too few supporting windows";
    for (std::size_t j = i + 1 - cfg.consecutive; j <= i; ++j) {
      if (w[j].label != ev.action) return at + "supporting window of another class";
      if (w[j].confidence < cfg.threshold) return at + "supporting window below threshold";
    }
    if (ev.confidence < cfg.threshold) return at + "event confidence below threshold";
    const double frames_since =
        last_time[ev.action] < 0.0 ? INFINITY : std::round((ev.t_start_s - last_time[ev.action]) * tl.fps);
    if (frames_since < static_cast<double>(cfg.refractory)) return at + "refractory violated";
    last_time[ev.action] = ev.t_start_s;
  }
  return {};
}

}  // namespace gfx_test
