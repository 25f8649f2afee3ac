#pragma once

// Fully connected ReLU network with softmax cross-entropy loss, exposed as an
// Objective over the flattened parameter vector.
//
// Parameter layout, layer by layer: the weight matrix (rows = outputs,
// row-major) followed by that layer's bias vector.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "llrgd/format.hpp"
#include "llrgd/objective.hpp"

namespace llrgd {

struct MlpSpec {
  std::vector<std::size_t> layer_widths;  ///< input, hidden..., output

  std::size_t layers() const noexcept { return layer_widths.size() - 1; }
  std::size_t input_width() const { return layer_widths.front(); }
  std::size_t output_width() const { return layer_widths.back(); }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_widths.size(); ++l) n += layer_widths[l] * layer_widths[l + 1] + layer_widths[l + 1];
    return n;
  }

  /// Offset of layer l's weight block; its bias block follows the weights.
  std::size_t weight_offset(std::size_t l) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < l; ++k) off += layer_widths[k] * layer_widths[k + 1] + layer_widths[k + 1];
    return off;
  }
  std::size_t bias_offset(std::size_t l) const { return weight_offset(l) + layer_widths[l] * layer_widths[l + 1]; }

  void validate() const {
    if (layer_widths.size() < 4) throw ConfigError("MlpSpec: need input, at least two hidden layers, and output");
    for (std::size_t w : layer_widths)
      if (w == 0) throw ConfigError("MlpSpec: layer widths must be positive");
    if (output_width() < 2) throw ConfigError("MlpSpec: softmax output needs at least two classes");
  }
};

struct Dataset {
  std::vector<Vector> inputs;
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return inputs.size(); }

  void validate(const MlpSpec& spec) const {
    if (inputs.empty()) throw ConfigError("Dataset: empty dataset");
    if (inputs.size() != labels.size()) throw DimensionError("Dataset: inputs and labels differ in length");
    for (const auto& x : inputs) require_dim(x.size(), spec.input_width(), "Dataset input");
    for (std::size_t y : labels)
      if (y >= spec.output_width()) throw DimensionError("Dataset: label exceeds output width");
  }
};

struct LossAndGradient {
  double loss = 0.0;
  Vector gradient;
};

namespace mlp_detail {

struct ForwardCache {
  std::vector<Vector> activations;   ///< a_0 (input) .. a_L (logits)
  std::vector<Vector> preactivations;  ///< z_1 .. z_L
};

inline ForwardCache forward(const MlpSpec& spec, const Vector& params, const Vector& input) {
  ForwardCache c;
  c.activations.push_back(input);
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const std::size_t in = spec.layer_widths[l], out = spec.layer_widths[l + 1];
    const double* W = params.data() + spec.weight_offset(l);
    const double* b = params.data() + spec.bias_offset(l);
    const Vector& a = c.activations.back();
    Vector z(out);
    for (std::size_t i = 0; i < out; ++i) {
      double s = b[i];
      for (std::size_t j = 0; j < in; ++j) s += W[i * in + j] * a[j];
      z[i] = s;
    }
    Vector next = z;
    if (l + 1 < spec.layers())
      for (double& v : next) v = std::max(0.0, v);
    c.preactivations.push_back(std::move(z));
    c.activations.push_back(std::move(next));
  }
  return c;
}

inline double log_sum_exp(const Vector& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace mlp_detail

/// Mean softmax cross-entropy and its exact gradient by backpropagation.
/// ReLU'(0) is taken as 0.
inline LossAndGradient mlp_loss_and_gradient(const MlpSpec& spec, const Dataset& data, const Vector& params,
                                             bool want_gradient = true) {
  require_dim(params.size(), spec.param_count(), "MLP parameter vector");
  LossAndGradient out;
  if (want_gradient) out.gradient.assign(params.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(data.size());

  for (std::size_t s = 0; s < data.size(); ++s) {
    const auto cache = mlp_detail::forward(spec, params, data.inputs[s]);
    const Vector& logits = cache.activations.back();
    const double lse = mlp_detail::log_sum_exp(logits);
    out.loss += (lse - logits[data.labels[s]]) * inv_n;
    if (!want_gradient) continue;

    Vector delta(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) delta[i] = std::exp(logits[i] - lse) * inv_n;
    delta[data.labels[s]] -= inv_n;

    for (std::size_t l = spec.layers(); l-- > 0;) {
      const std::size_t in = spec.layer_widths[l], outw = spec.layer_widths[l + 1];
      const Vector& a = cache.activations[l];
      double* dW = out.gradient.data() + spec.weight_offset(l);
      double* db = out.gradient.data() + spec.bias_offset(l);
      for (std::size_t i = 0; i < outw; ++i) {
        db[i] += delta[i];
        for (std::size_t j = 0; j < in; ++j) dW[i * in + j] += delta[i] * a[j];
      }
      if (l == 0) break;
      const double* W = params.data() + spec.weight_offset(l);
      const Vector& z_prev = cache.preactivations[l - 1];
      Vector prev(in, 0.0);
      for (std::size_t j = 0; j < in; ++j) {
        if (!(z_prev[j] > 0.0)) continue;
        double s2 = 0.0;
        for (std::size_t i = 0; i < outw; ++i) s2 += W[i * in + j] * delta[i];
        prev[j] = s2;
      }
      delta = std::move(prev);
    }
  }
  return out;
}

/// Smallest |pre-activation| over all hidden units and samples; points with a
/// tiny value sit on a ReLU kink where finite differences are unreliable.
inline double min_abs_preactivation(const MlpSpec& spec, const Dataset& data, const Vector& params) {
  double m = INFINITY;
  for (const auto& x : data.inputs) {
    const auto cache = mlp_detail::forward(spec, params, x);
    for (std::size_t l = 0; l + 1 < cache.preactivations.size(); ++l)
      for (double z : cache.preactivations[l]) m = std::min(m, std::abs(z));
  }
  return m;
}

/// Objective over the flattened parameters: value = mean cross-entropy,
/// gradient = backpropagation, Hessian = finite differences of the value.
inline Objective mlp_objective(const MlpSpec& spec, const Dataset& data) {
  spec.validate();
  data.validate(spec);
  auto s = std::make_shared<const MlpSpec>(spec);
  auto d = std::make_shared<const Dataset>(data);
  const std::size_t n = spec.param_count();
  return Objective(
      "mlp", n, [s, d](const Vector& p) { return mlp_loss_and_gradient(*s, *d, p, false).loss; },
      [s, d](const Vector& p) { return mlp_loss_and_gradient(*s, *d, p, true).gradient; }, {}, cube(n, -3.0, 3.0));
}

/// Weights and biases uniform in [−1/√fan_in, 1/√fan_in].
inline Vector init_params(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  Vector p(spec.param_count());
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const double s = 1.0 / std::sqrt(static_cast<double>(spec.layer_widths[l]));
    std::uniform_real_distribution<double> u(-s, s);
    const std::size_t begin = spec.weight_offset(l);
    const std::size_t end = spec.bias_offset(l) + spec.layer_widths[l + 1];
    for (std::size_t i = begin; i < end; ++i) p[i] = u(rng);
  }
  return p;
}

/// Gaussian clusters (unit variance) whose means sit on a circle in the first
/// two coordinates with neighbouring means `separation` apart (on a line when
/// dim == 1). Samples are grouped by class.
inline Dataset make_blobs(std::size_t n_per_class, std::size_t classes, std::size_t dim, double separation,
                          std::uint64_t seed) {
  if (n_per_class == 0 || classes == 0 || dim == 0) throw ConfigError("make_blobs: counts must be positive");
  if (separation < 0.0) throw ConfigError("make_blobs: separation must be non-negative");
  std::vector<Vector> means(classes, Vector(dim, 0.0));
  if (classes > 1) {
    if (dim == 1) {
      for (std::size_t c = 0; c < classes; ++c)
        means[c][0] = separation * (static_cast<double>(c) - 0.5 * static_cast<double>(classes - 1));
    } else {
      const double angle = 2.0 * std::numbers::pi / static_cast<double>(classes);
      const double radius = separation / (2.0 * std::sin(0.5 * angle));
      for (std::size_t c = 0; c < classes; ++c) {
        means[c][0] = radius * std::cos(angle * static_cast<double>(c));
        means[c][1] = radius * std::sin(angle * static_cast<double>(c));
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset d;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      Vector x = means[c];
      for (double& v : x) v += noise(rng);
      d.inputs.push_back(std::move(x));
      d.labels.push_back(c);
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// CSV import/export: one row per sample, features then the integer label.
// ---------------------------------------------------------------------------

inline void write_dataset_csv(std::ostream& os, const Dataset& d) {
  for (std::size_t s = 0; s < d.size(); ++s) {
    for (double v : d.inputs[s]) os << format_double(v) << ',';
    os << d.labels[s] << "\r\n";
  }
}

inline Dataset read_dataset_csv(std::istream& is) {
  Dataset d;
  std::string line;
  std::size_t width = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2) throw ConfigError("dataset CSV: need at least one feature and a label per row");
    if (width == 0) width = cells.size();
    if (cells.size() != width) throw ConfigError("dataset CSV: ragged rows");
    Vector x;
    for (std::size_t i = 0; i + 1 < cells.size(); ++i) x.push_back(std::stod(cells[i]));
    const long label = std::stol(cells.back());
    if (label < 0) throw ConfigError("dataset CSV: negative label");
    d.inputs.push_back(std::move(x));
    d.labels.push_back(static_cast<std::size_t>(label));
  }
  return d;
}

}  // namespace llrgd
