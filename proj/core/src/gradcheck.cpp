#include "gesturefx/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gesturefx/nn_ops.hpp"
#include "gesturefx/rng.hpp"

namespace gesturefx {

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

std::vector<std::string> tensor_names(const Model& model) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < model.networks.size(); ++k) {
    const auto& net = model.networks[k];
    const std::string prefix = "net" + std::to_string(k) + ".";
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      for (const char* t : {"w", "u", "b"}) names.push_back(prefix + "l" + std::to_string(l) + "." + t);
    }
    if (net.has_projection()) {
      names.push_back(prefix + "proj_w");
      names.push_back(prefix + "proj_b");
    }
  }
  for (std::size_t k = 0; k < model.head_w.size(); ++k) {
    names.push_back("head" + std::to_string(k) + ".w");
    names.push_back("head" + std::to_string(k) + ".b");
  }
  return names;
}

GradcheckReport gradcheck_model(std::uint64_t seed, const GradcheckOptions& opts) {
  Rng root(seed);
  Rng init = root.split("init");
  Model model = Model::build(model_spec(opts.variant, opts.hidden_size, opts.projection_divisor), init);

  // Perturb biases away from their structured init so every entry matters.
  Rng data = root.split("data");
  for (Matrix* t : model.tensors()) {
    for (double& v : t->values()) v += 0.1 * data.uniform(-1.0, 1.0);
  }
  std::vector<Matrix> samples;
  std::vector<std::size_t> labels;
  for (std::size_t b = 0; b < opts.batch; ++b) {
    Matrix s(model.spec.seq_len, model.spec.input_size);
    for (double& v : s.values()) v = data.uniform(-1.0, 1.0);
    samples.push_back(std::move(s));
    labels.push_back(data.below(model.spec.class_count()));
  }
  const auto frames = batch_frames(samples, model.spec.seq_len, model.spec.input_size);
  const Rng mask_rng = root.split("dropout");
  const ForwardOptions fwd{.training = opts.training, .threads = 1};

  auto loss_of = [&](const Model& m) {
    Rng r = mask_rng;
    const auto tape = model_forward(frames, m, r, fwd);
    double loss = 0.0;
    for (std::size_t b = 0; b < labels.size(); ++b) {
      loss += cross_entropy(tape.probabilities.row(b), labels[b]);
    }
    return loss / static_cast<double>(labels.size());
  };

  Model grads = Model::zeros_like(model);
  {
    Rng r = mask_rng;
    const auto tape = model_forward(frames, model, r, fwd);
    model_backward(tape, labels, model, grads);
  }

  GradcheckReport report;
  report.seed = seed;
  report.parameters = model.parameter_count();
  const auto names = tensor_names(model);
  auto params = model.tensors();
  const auto analytic = std::as_const(grads).tensors();
  for (std::size_t t = 0; t < params.size(); ++t) {
    Matrix& p = *params[t];
    TensorCheck check;
    check.name = names[t];
    const std::size_t n = p.size();
    const std::size_t count = opts.max_entries == 0 ? n : std::min(n, opts.max_entries);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = count == n ? k : (k * n) / count;
      const double saved = p[i];
      p[i] = saved + opts.step;
      const double up = loss_of(model);
      p[i] = saved - opts.step;
      const double down = loss_of(model);
      p[i] = saved;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = (*analytic[t])[i];
      check.max_rel_error = std::max(check.max_rel_error, relative_error(a, numeric));
      check.max_abs_error = std::max(check.max_abs_error, std::abs(a - numeric));
      ++check.entries;
    }
    report.entries += check.entries;
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.tensors.push_back(std::move(check));
  }
  return report;
}

}  // namespace gesturefx
