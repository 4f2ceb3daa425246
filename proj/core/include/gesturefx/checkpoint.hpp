#pragma once

#include <filesystem>
#include <iosfwd>

#include "gesturefx/model.hpp"

namespace gesturefx {

inline constexpr int kCheckpointFormatVersion = 1;

// Versioned JSON checkpoint. Doubles are written in shortest round-trip
// decimal form, so load(save(m)) == m exactly.
//
//   {"format_version": 1, "variant": "its-lstm", "seq_len": 24, "input_size": 36,
//    "dropout": 0.2, "rng_seed": 7, "class_names": ["wave", ...],
//    "configs": [{"table_row": 0, "hidden_size": 256, "delay": 1, "window": 5,
//                 "stride": 5, "projection": 128, "layers": 1}, ...],
//    "head": {"widths": [72, 18, 4], "dropout": [true, true, false]},
//    "tensors": {"networks": [{"layers": [{"w": [[...]], "u": [[...]], "b": [[...]]}],
//                              "proj_w": [[...]], "proj_b": [[...]]}, ...],
//                "head": [{"w": [[...]], "b": [[...]]}, ...]}}
void write_checkpoint(std::ostream& out, const Model& model);
Model read_checkpoint(std::istream& in);

void save_checkpoint(const Model& model, const std::filesystem::path& path);
// Throws MigrationError on a foreign format_version and ParseError on
// malformed content.
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace gesturefx
