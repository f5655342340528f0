#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedmix/matrix.hpp"

namespace fedmix {

// One dense layer maps cols inputs to rows outputs.
struct LayerShape {
  int rows = 0;
  int cols = 0;
  bool operator==(const LayerShape&) const = default;
};

// Flat parameter vector plus the layer layout describing it. Per layer the
// values hold the row-major weight block followed by the bias block, so the
// whole model supports vector-space arithmetic (aggregation, mixing, SGD)
// without reshaping. All math is double precision.
struct ModelParams {
  std::vector<LayerShape> layout;
  std::vector<double> values;

  int layer_count() const { return static_cast<int>(layout.size()); }
  int input_dim() const { return layout.empty() ? 0 : layout.front().cols; }
  int output_dim() const { return layout.empty() ? 0 : layout.back().rows; }

  std::size_t layer_offset(int layer) const;
  std::size_t param_count() const;

  double* weights(int layer) { return values.data() + layer_offset(layer); }
  const double* weights(int layer) const { return values.data() + layer_offset(layer); }
  double* biases(int layer) {
    return values.data() + layer_offset(layer) +
           static_cast<std::size_t>(layout[static_cast<std::size_t>(layer)].rows) *
               static_cast<std::size_t>(layout[static_cast<std::size_t>(layer)].cols);
  }
  const double* biases(int layer) const {
    return const_cast<ModelParams*>(this)->biases(layer);
  }
};

bool same_layout(const ModelParams& a, const ModelParams& b);
void require_same_layout(const ModelParams& a, const ModelParams& b, const char* where);
ModelParams zeros_like(const ModelParams& m);

// Glorot-uniform weights, zero biases. hidden may be empty (= softmax
// regression). Hidden layers use tanh; the output layer is softmax.
ModelParams init_model(int input_dim, const std::vector<int>& hidden, int classes,
                       std::uint64_t seed);

// Throws NumericalError naming the first offending layer.
void check_finite(const ModelParams& m, const char* where);

// In-place y += a * x (layouts must match).
void axpy(ModelParams& y, double a, const ModelParams& x);
double squared_distance(const ModelParams& a, const ModelParams& b);

// Mini-batch: inputs always present, one-hot targets only for labeled data.
// sample_ids track provenance back into the owning pool (diagnostics).
struct Batch {
  Matrix inputs;
  std::optional<Matrix> targets;
  std::vector<int> sample_ids;

  void validate() const;  // shape agreement; target rows sum to 1
};

struct SgdConfig {
  double learning_rate = 0.1;
  int batch_size = 32;
  int epochs = 1;

  void validate() const;
};

// Row-wise class probabilities for a batch of inputs.
Matrix forward(const ModelParams& m, const Matrix& inputs);

// Forward pass with everything backward needs. activations[0] is the input,
// activations[L] the softmax output.
struct ForwardCache {
  std::vector<Matrix> activations;
};
ForwardCache forward_cached(const ModelParams& m, const Matrix& inputs);
inline const Matrix& output_probs(const ForwardCache& c) { return c.activations.back(); }

// Pulls dL/d(probabilities) back to a parameter gradient with the same layout
// as the model. Every loss in this library differentiates through here, so
// the chain through the softmax Jacobian lives in exactly one place.
ModelParams backward_from_probs(const ModelParams& m, const ForwardCache& cache,
                                const Matrix& dprobs);

// One plain SGD step: returns m - learning_rate * grad.
ModelParams sgd_step(const ModelParams& m, const ModelParams& grad, const SgdConfig& cfg);

Matrix one_hot(const std::vector<int>& labels, int classes);

// Largest probability wins; ties resolve to the lowest class index.
int argmax_row(const double* row, int n);

}  // namespace fedmix
