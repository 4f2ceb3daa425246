#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gesturefx/model.hpp"

namespace gesturefx {

// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor = 1e-6);

struct GradcheckOptions {
  Variant variant = Variant::kItsLstm;
  std::size_t hidden_size = 8;
  std::size_t projection_divisor = 2;
  std::size_t batch = 2;
  double step = 1e-5;
  // Entries checked per tensor, spread evenly; 0 checks every entry.
  std::size_t max_entries = 0;
  // Check with dropout active under a fixed mask.
  bool training = true;
};

struct TensorCheck {
  std::string name;
  std::size_t entries = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradcheckReport {
  std::uint64_t seed = 0;
  std::size_t parameters = 0;
  std::size_t entries = 0;
  double max_rel_error = 0.0;
  std::vector<TensorCheck> tensors;
};

// Compares the analytic gradient of the batch-mean cross-entropy of a reduced
// model (random input and labels drawn from `seed`) with central differences.
GradcheckReport gradcheck_model(std::uint64_t seed, const GradcheckOptions& opts = {});

// Names of Model::tensors() in order, e.g. "net3.l0.w", "net0.proj_b", "head1.w".
std::vector<std::string> tensor_names(const Model& model);

}  // namespace gesturefx
