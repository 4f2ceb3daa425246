#include "gesturefx/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "gesturefx/error.hpp"
#include "gesturefx/synth.hpp"

namespace gesturefx {
namespace {

using nlohmann::json;

json tensor_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(json(std::vector<double>(row.begin(), row.end())));
  }
  return rows;
}

Matrix tensor_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError("checkpoint tensor " + what + " is not an array");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j[0].size();
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols) {
      throw ParseError("checkpoint tensor " + what + " is ragged");
    }
    for (const auto& v : row) {
      if (!v.is_number()) throw ParseError("checkpoint tensor " + what + " holds a non-number");
      data.push_back(v.get<double>());
    }
  }
  return Matrix(rows, cols, std::move(data));
}

json optional_size(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::size_t> read_optional_size(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::size_t>();
}

json model_to_json(const Model& model) {
  const auto& spec = model.spec;
  json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["variant"] = variant_name(spec.variant);
  doc["seq_len"] = spec.seq_len;
  doc["input_size"] = spec.input_size;
  doc["dropout"] = spec.dropout;
  doc["rng_seed"] = model.seed;
  json names = json::array();
  for (std::size_t c = 0; c < spec.class_count(); ++c) {
    names.push_back(c < kClassCount ? std::string(gesture_name(c)) : "class" + std::to_string(c));
  }
  doc["class_names"] = names;

  json configs = json::array();
  for (std::size_t k = 0; k < spec.networks.size(); ++k) {
    const auto& c = spec.networks[k];
    configs.push_back({{"table_row", optional_size(spec.network_rows[k])},
                       {"hidden_size", c.hidden_size},
                       {"delay", c.delay},
                       {"window", c.window},
                       {"stride", optional_size(c.stride)},
                       {"projection", optional_size(c.projection)},
                       {"layers", c.layers}});
  }
  doc["configs"] = configs;
  doc["head"] = {{"widths", spec.head_widths}, {"dropout", spec.head_dropout}};

  json nets = json::array();
  for (const auto& net : model.networks) {
    json layers = json::array();
    for (const auto& l : net.layers) {
      layers.push_back({{"w", tensor_to_json(l.w)}, {"u", tensor_to_json(l.u)},
                        {"b", tensor_to_json(l.b)}});
    }
    json n = {{"layers", layers}};
    if (net.has_projection()) {
      n["proj_w"] = tensor_to_json(net.proj_w);
      n["proj_b"] = tensor_to_json(net.proj_b);
    }
    nets.push_back(std::move(n));
  }
  json head = json::array();
  for (std::size_t k = 0; k < model.head_w.size(); ++k) {
    head.push_back({{"w", tensor_to_json(model.head_w[k])}, {"b", tensor_to_json(model.head_b[k])}});
  }
  doc["tensors"] = {{"networks", nets}, {"head", head}};
  return doc;
}

Model model_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("format_version")) {
    throw ParseError("checkpoint lacks format_version");
  }
  if (!doc["format_version"].is_number_integer() ||
      doc["format_version"].get<long long>() != kCheckpointFormatVersion) {
    throw MigrationError("checkpoint format_version " + doc["format_version"].dump() +
                         " is not supported (expected " +
                         std::to_string(kCheckpointFormatVersion) + ")");
  }
  Model model;
  auto& spec = model.spec;
  spec.variant = parse_variant(doc.at("variant").get<std::string>());
  spec.seq_len = doc.at("seq_len").get<std::size_t>();
  spec.input_size = doc.at("input_size").get<std::size_t>();
  spec.dropout = doc.at("dropout").get<double>();
  model.seed = doc.at("rng_seed").get<std::uint64_t>();
  for (const auto& c : doc.at("configs")) {
    TsLstmConfig cfg;
    cfg.hidden_size = c.at("hidden_size").get<std::size_t>();
    cfg.delay = c.at("delay").get<std::size_t>();
    cfg.window = c.at("window").get<std::size_t>();
    cfg.stride = read_optional_size(c.at("stride"));
    cfg.projection = read_optional_size(c.at("projection"));
    cfg.layers = c.at("layers").get<std::size_t>();
    spec.networks.push_back(cfg);
    spec.network_rows.push_back(read_optional_size(c.at("table_row")));
  }
  spec.head_widths = doc.at("head").at("widths").get<std::vector<std::size_t>>();
  spec.head_dropout = doc.at("head").at("dropout").get<std::vector<bool>>();
  spec.validate();

  const auto& tensors = doc.at("tensors");
  const auto& nets = tensors.at("networks");
  if (nets.size() != spec.networks.size()) {
    throw ParseError("checkpoint lists " + std::to_string(nets.size()) + " networks, configs " +
                     std::to_string(spec.networks.size()));
  }
  for (std::size_t k = 0; k < nets.size(); ++k) {
    TsLstmNetwork net;
    net.config = spec.networks[k];
    net.input_size = spec.input_size;
    const std::string tag = "networks[" + std::to_string(k) + "]";
    for (const auto& l : nets[k].at("layers")) {
      LstmParams p;
      p.w = tensor_from_json(l.at("w"), tag + ".w");
      p.u = tensor_from_json(l.at("u"), tag + ".u");
      p.b = tensor_from_json(l.at("b"), tag + ".b");
      p.hidden_size = p.u.cols();
      p.input_size = p.w.cols();
      net.layers.push_back(std::move(p));
    }
    if (net.has_projection()) {
      net.proj_w = tensor_from_json(nets[k].at("proj_w"), tag + ".proj_w");
      net.proj_b = tensor_from_json(nets[k].at("proj_b"), tag + ".proj_b");
    }
    model.networks.push_back(std::move(net));
  }
  for (const auto& h : tensors.at("head")) {
    model.head_w.push_back(tensor_from_json(h.at("w"), "head.w"));
    model.head_b.push_back(tensor_from_json(h.at("b"), "head.b"));
  }
  try {
    model.check();
  } catch (const DimensionError& e) {
    throw ParseError(std::string("checkpoint tensors inconsistent: ") + e.what());
  }
  return model;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Model& model) {
  model.check();
  out << model_to_json(model).dump() << '\n';
}

Model read_checkpoint(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    return model_from_json(doc);
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint schema error: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("checkpoint configuration invalid: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ParseError(std::string("checkpoint field invalid: ") + e.what());
  }
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_checkpoint(out, model);
  if (!out) throw IoError("write failed for " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace gesturefx
