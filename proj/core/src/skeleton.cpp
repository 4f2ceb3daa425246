#include "gesturefx/skeleton.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "gesturefx/error.hpp"
#include "gesturefx/model.hpp"

namespace gesturefx {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "nose",       "neck",      "r_shoulder", "r_elbow", "r_wrist", "l_shoulder",
    "l_elbow",    "l_wrist",   "r_hip",      "r_knee",  "r_ankle", "l_hip",
    "l_knee",     "l_ankle",   "r_eye",      "l_eye",   "r_ear",   "l_ear"};

std::string where(std::size_t line) { return "line " + std::to_string(line) + ": "; }

double number_field(const json& v, std::size_t line, const char* what) {
  if (!v.is_number()) throw SchemaError(where(line) + what + " must be a number");
  return v.get<double>();
}

SkeletonSequence parse_sequence(const json& obj, std::size_t line) {
  if (!obj.is_object()) throw SchemaError(where(line) + "expected a JSON object");
  SkeletonSequence seq;
  if (!obj.contains("id") || !obj["id"].is_string()) {
    throw SchemaError(where(line) + "\"id\" must be a string");
  }
  seq.id = obj["id"].get<std::string>();
  if (obj.contains("label") && !obj["label"].is_null()) {
    const auto& l = obj["label"];
    if (!l.is_number_integer() || l.get<long long>() < 0 ||
        l.get<long long>() >= static_cast<long long>(kClassCount)) {
      throw SchemaError(where(line) + "\"label\" must be null or an integer in 0..3");
    }
    seq.label = l.get<std::size_t>();
  }
  if (!obj.contains("fps")) throw SchemaError(where(line) + "missing \"fps\"");
  seq.fps = number_field(obj["fps"], line, "\"fps\"");
  if (!(seq.fps > 0.0) || !std::isfinite(seq.fps)) {
    throw SchemaError(where(line) + "\"fps\" must be positive");
  }
  if (!obj.contains("frames") || !obj["frames"].is_array()) {
    throw SchemaError(where(line) + "\"frames\" must be an array");
  }
  const auto& frames = obj["frames"];
  seq.frames.reserve(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& fr = frames[f];
    if (!fr.is_object() || !fr.contains("kp") || !fr["kp"].is_array()) {
      throw SchemaError(where(line) + "frame " + std::to_string(f) + " lacks a \"kp\" array");
    }
    const auto& kp = fr["kp"];
    if (kp.size() != kJointCount) {
      throw SchemaError(where(line) + "frame " + std::to_string(f) + " has " +
                        std::to_string(kp.size()) + " joints, expected " +
                        std::to_string(kJointCount));
    }
    KeypointFrame frame;
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const auto& k = kp[j];
      if (!k.is_array() || k.size() != 4) {
        throw SchemaError(where(line) + "frame " + std::to_string(f) + " joint " +
                          std::to_string(j) + " must be [x, y, conf, missing]");
      }
      Keypoint p;
      p.x = number_field(k[0], line, "x");
      p.y = number_field(k[1], line, "y");
      p.confidence = number_field(k[2], line, "confidence");
      const double missing = number_field(k[3], line, "missing flag");
      if (missing != 0.0 && missing != 1.0) {
        throw SchemaError(where(line) + "missing flag must be 0 or 1");
      }
      p.missing = missing == 1.0;
      if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) {
        throw SchemaError(where(line) + "confidence outside [0, 1]");
      }
      if (p.missing && p.confidence != 0.0) {
        throw SchemaError(where(line) + "missing joint " + std::to_string(j) +
                          " must have confidence 0");
      }
      if (!p.missing && (!std::isfinite(p.x) || !std::isfinite(p.y))) {
        throw SchemaError(where(line) + "non-finite coordinate");
      }
      frame[j] = p;
    }
    seq.frames.push_back(frame);
  }
  return seq;
}

json sequence_to_json(const SkeletonSequence& seq) {
  json frames = json::array();
  for (const auto& frame : seq.frames) {
    json kp = json::array();
    for (const auto& p : frame.joints) {
      kp.push_back(json::array({p.x, p.y, p.confidence, p.missing ? 1 : 0}));
    }
    frames.push_back(json{{"kp", std::move(kp)}});
  }
  json obj;
  obj["id"] = seq.id;
  obj["label"] = seq.label ? json(*seq.label) : json(nullptr);
  obj["fps"] = seq.fps;
  obj["frames"] = std::move(frames);
  return obj;
}

void require_present(const KeypointFrame& frame, std::size_t joint, std::size_t index,
                     const char* op) {
  if (frame[joint].missing) {
    throw PreconditionError(std::string(op) + ": joint " + std::string(joint_name(joint)) +
                            " missing in frame " + std::to_string(index));
  }
}

}  // namespace

std::string_view joint_name(std::size_t joint) {
  if (joint >= kJointCount) throw ArgumentError("joint index out of range");
  return kJointNames[joint];
}

std::size_t SkeletonSequence::missing_count() const {
  std::size_t n = 0;
  for (const auto& f : frames)
    for (const auto& p : f.joints) n += p.missing ? 1 : 0;
  return n;
}

bool is_model_ready(const SkeletonSequence& seq) {
  return seq.frames.size() == kSequenceLength && seq.missing_count() == 0;
}

Matrix to_tensor(const SkeletonSequence& seq) {
  Matrix m(seq.frames.size(), 2 * kJointCount);
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      require_present(seq.frames[t], j, t, "to_tensor");
      m(t, 2 * j) = seq.frames[t][j].x;
      m(t, 2 * j + 1) = seq.frames[t][j].y;
    }
  }
  return m;
}

SkeletonSequence normalize(const SkeletonSequence& seq) {
  SkeletonSequence out = seq;
  for (std::size_t t = 0; t < out.frames.size(); ++t) {
    auto& frame = out.frames[t];
    for (std::size_t j : {kNeck, kRHip, kLHip}) require_present(frame, j, t, "normalize");
    const double ox = frame[kNeck].x;
    const double oy = frame[kNeck].y;
    const double hx = 0.5 * (frame[kRHip].x + frame[kLHip].x);
    const double hy = 0.5 * (frame[kRHip].y + frame[kLHip].y);
    const double torso = std::hypot(hx - ox, hy - oy);
    if (!(torso >= 1e-6)) {
      throw DegeneratePoseError("normalize: torso length " + std::to_string(torso) +
                                " below 1e-6 in frame " + std::to_string(t));
    }
    for (auto& p : frame.joints) {
      if (p.missing) continue;
      p.x = (p.x - ox) / torso;
      p.y = (p.y - oy) / torso;
    }
  }
  return out;
}

SkeletonSequence resample(const SkeletonSequence& seq, std::size_t frame_count) {
  const std::size_t n = seq.frames.size();
  if (n < 2) throw ArgumentError("resample needs at least 2 frames, got " + std::to_string(n));
  if (frame_count < 2) throw ArgumentError("resample target must be at least 2 frames");
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < kJointCount; ++j) require_present(seq.frames[t], j, t, "resample");
  }
  if (n == frame_count) return seq;

  SkeletonSequence out;
  out.id = seq.id;
  out.label = seq.label;
  const double span = static_cast<double>(n - 1);
  out.fps = seq.fps * static_cast<double>(frame_count - 1) / span;
  out.frames.resize(frame_count);
  for (std::size_t k = 0; k < frame_count; ++k) {
    const double pos = span * static_cast<double>(k) / static_cast<double>(frame_count - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    if (lo >= n - 1) lo = n - 2;
    const double w = pos - static_cast<double>(lo);
    const auto& a = seq.frames[lo];
    const auto& b = seq.frames[lo + 1];
    for (std::size_t j = 0; j < kJointCount; ++j) {
      Keypoint p;
      p.x = (1.0 - w) * a[j].x + w * b[j].x;
      p.y = (1.0 - w) * a[j].y + w * b[j].y;
      p.confidence = (1.0 - w) * a[j].confidence + w * b[j].confidence;
      out.frames[k][j] = p;
    }
  }
  return out;
}

SkeletonSequence resample_to_24(const SkeletonSequence& seq) {
  return resample(seq, kSequenceLength);
}

SkeletonSequence prepare_for_model(const SkeletonSequence& seq) {
  return normalize(resample_to_24(seq));
}

std::vector<SkeletonSequence> read_jsonl(std::istream& in) {
  std::vector<SkeletonSequence> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(where(line) + e.what());
    }
    out.push_back(parse_sequence(obj, line));
  }
  return out;
}

void write_jsonl(std::ostream& out, const std::vector<SkeletonSequence>& seqs) {
  for (const auto& s : seqs) out << sequence_to_json(s).dump() << '\n';
}

std::vector<SkeletonSequence> load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_jsonl(in);
}

void save_jsonl(const std::vector<SkeletonSequence>& seqs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_jsonl(out, seqs);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace gesturefx
