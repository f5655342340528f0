#include "fedmix/nn.hpp"

#include <cmath>
#include <string>

#include "fedmix/errors.hpp"
#include "fedmix/rng.hpp"

namespace fedmix {

namespace {

std::size_t layer_param_count(const LayerShape& s) {
  return static_cast<std::size_t>(s.rows) * static_cast<std::size_t>(s.cols) +
         static_cast<std::size_t>(s.rows);
}

}  // namespace

std::size_t ModelParams::layer_offset(int layer) const {
  std::size_t off = 0;
  for (int l = 0; l < layer; ++l) off += layer_param_count(layout[static_cast<std::size_t>(l)]);
  return off;
}

std::size_t ModelParams::param_count() const {
  std::size_t n = 0;
  for (const auto& s : layout) n += layer_param_count(s);
  return n;
}

bool same_layout(const ModelParams& a, const ModelParams& b) {
  return a.layout == b.layout && a.values.size() == b.values.size();
}

void require_same_layout(const ModelParams& a, const ModelParams& b, const char* where) {
  if (!same_layout(a, b)) {
    throw ShapeError(std::string(where) + ": model layouts differ");
  }
}

ModelParams zeros_like(const ModelParams& m) {
  ModelParams z;
  z.layout = m.layout;
  z.values.assign(m.values.size(), 0.0);
  return z;
}

ModelParams init_model(int input_dim, const std::vector<int>& hidden, int classes,
                       std::uint64_t seed) {
  if (input_dim <= 0) throw ContractError("init_model: input_dim must be > 0");
  if (classes < 2) throw ContractError("init_model: need at least 2 classes");
  for (int h : hidden) {
    if (h <= 0) throw ContractError("init_model: hidden widths must be > 0");
  }

  std::vector<int> dims;
  dims.push_back(input_dim);
  for (int h : hidden) dims.push_back(h);
  dims.push_back(classes);

  ModelParams m;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    m.layout.push_back(LayerShape{dims[l + 1], dims[l]});
  }
  m.values.assign(m.param_count(), 0.0);

  Rng rng = make_rng(derive_seed(seed, stream_tag("init")));
  for (int l = 0; l < m.layer_count(); ++l) {
    const LayerShape s = m.layout[static_cast<std::size_t>(l)];
    const double r = std::sqrt(6.0 / (static_cast<double>(s.rows) + static_cast<double>(s.cols)));
    double* w = m.weights(l);
    const std::size_t n = static_cast<std::size_t>(s.rows) * static_cast<std::size_t>(s.cols);
    for (std::size_t i = 0; i < n; ++i) w[i] = (2.0 * uniform01(rng) - 1.0) * r;
    // biases stay zero
  }
  return m;
}

void check_finite(const ModelParams& m, const char* where) {
  for (int l = 0; l < m.layer_count(); ++l) {
    const std::size_t begin = m.layer_offset(l);
    const std::size_t end = begin + layer_param_count(m.layout[static_cast<std::size_t>(l)]);
    for (std::size_t i = begin; i < end; ++i) {
      if (!std::isfinite(m.values[i])) {
        throw NumericalError(std::string(where) + ": non-finite value in layer " +
                             std::to_string(l));
      }
    }
  }
}

void axpy(ModelParams& y, double a, const ModelParams& x) {
  require_same_layout(y, x, "axpy");
  for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += a * x.values[i];
}

double squared_distance(const ModelParams& a, const ModelParams& b) {
  require_same_layout(a, b, "squared_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return s;
}

void Batch::validate() const {
  if (inputs.rows() == 0) throw ContractError("Batch: empty inputs");
  if (targets.has_value()) {
    if (targets->rows() != inputs.rows()) {
      throw ShapeError("Batch: target rows do not match input rows");
    }
    for (int r = 0; r < targets->rows(); ++r) {
      double sum = 0.0;
      for (int c = 0; c < targets->cols(); ++c) {
        const double v = (*targets)(r, c);
        if (v < 0.0) throw ContractError("Batch: negative target entry");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw ContractError("Batch: target row " + std::to_string(r) + " does not sum to 1");
      }
    }
  }
  if (!sample_ids.empty() && static_cast<int>(sample_ids.size()) != inputs.rows()) {
    throw ShapeError("Batch: sample_ids size does not match input rows");
  }
}

void SgdConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("sgd: learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("sgd: batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("sgd: epochs must be >= 0");
}

namespace {

// out = act * W^T + b, activation applied in place by caller.
void dense_forward(const Matrix& act, const LayerShape& s, const double* w, const double* b,
                   Matrix& out) {
  for (int r = 0; r < act.rows(); ++r) {
    const double* a = act.row(r);
    double* o = out.row(r);
    for (int i = 0; i < s.rows; ++i) {
      const double* wrow = w + static_cast<std::size_t>(i) * s.cols;
      double acc = b[i];
      for (int j = 0; j < s.cols; ++j) acc += wrow[j] * a[j];
      o[i] = acc;
    }
  }
}

void softmax_rows(Matrix& z) {
  for (int r = 0; r < z.rows(); ++r) {
    double* row = z.row(r);
    double mx = row[0];
    for (int c = 1; c < z.cols(); ++c) mx = std::max(mx, row[c]);
    double sum = 0.0;
    for (int c = 0; c < z.cols(); ++c) {
      row[c] = std::exp(row[c] - mx);
      sum += row[c];
    }
    for (int c = 0; c < z.cols(); ++c) row[c] /= sum;
  }
}

}  // namespace

ForwardCache forward_cached(const ModelParams& m, const Matrix& inputs) {
  if (m.layer_count() == 0) throw ContractError("forward: empty model");
  if (inputs.cols() != m.input_dim()) {
    throw ShapeError("forward: input has " + std::to_string(inputs.cols()) +
                     " features, model expects " + std::to_string(m.input_dim()));
  }
  ForwardCache cache;
  cache.activations.reserve(static_cast<std::size_t>(m.layer_count()) + 1);
  cache.activations.push_back(inputs);
  for (int l = 0; l < m.layer_count(); ++l) {
    const LayerShape s = m.layout[static_cast<std::size_t>(l)];
    Matrix z(inputs.rows(), s.rows);
    dense_forward(cache.activations.back(), s, m.weights(l), m.biases(l), z);
    if (l + 1 < m.layer_count()) {
      for (double& v : z.data()) v = std::tanh(v);
    } else {
      softmax_rows(z);
    }
    cache.activations.push_back(std::move(z));
  }
  return cache;
}

Matrix forward(const ModelParams& m, const Matrix& inputs) {
  return forward_cached(m, inputs).activations.back();
}

ModelParams backward_from_probs(const ModelParams& m, const ForwardCache& cache,
                                const Matrix& dprobs) {
  const int L = m.layer_count();
  const Matrix& probs = cache.activations.back();
  if (!dprobs.same_shape(probs)) throw ShapeError("backward: dprobs shape mismatch");

  // Softmax Jacobian: dz_c = p_c * (dp_c - sum_k dp_k p_k).
  Matrix delta(dprobs.rows(), dprobs.cols());
  for (int r = 0; r < dprobs.rows(); ++r) {
    const double* p = probs.row(r);
    const double* dp = dprobs.row(r);
    double dot = 0.0;
    for (int c = 0; c < dprobs.cols(); ++c) dot += dp[c] * p[c];
    double* d = delta.row(r);
    for (int c = 0; c < dprobs.cols(); ++c) d[c] = p[c] * (dp[c] - dot);
  }

  ModelParams grad = zeros_like(m);
  for (int l = L - 1; l >= 0; --l) {
    const LayerShape s = m.layout[static_cast<std::size_t>(l)];
    const Matrix& a_prev = cache.activations[static_cast<std::size_t>(l)];
    double* gw = grad.weights(l);
    double* gb = grad.biases(l);
    for (int b = 0; b < delta.rows(); ++b) {
      const double* d = delta.row(b);
      const double* a = a_prev.row(b);
      for (int i = 0; i < s.rows; ++i) {
        double* gwrow = gw + static_cast<std::size_t>(i) * s.cols;
        const double di = d[i];
        for (int j = 0; j < s.cols; ++j) gwrow[j] += di * a[j];
        gb[i] += di;
      }
    }
    for (std::size_t i = m.layer_offset(l); i < m.layer_offset(l) + layer_param_count(s); ++i) {
      if (!std::isfinite(grad.values[i])) {
        throw NumericalError("backward: non-finite gradient in layer " + std::to_string(l));
      }
    }
    if (l > 0) {
      const double* w = m.weights(l);
      Matrix prev(delta.rows(), s.cols);
      for (int b = 0; b < delta.rows(); ++b) {
        const double* d = delta.row(b);
        const double* a = a_prev.row(b);
        double* pd = prev.row(b);
        for (int j = 0; j < s.cols; ++j) {
          double acc = 0.0;
          for (int i = 0; i < s.rows; ++i) acc += d[i] * w[static_cast<std::size_t>(i) * s.cols + j];
          pd[j] = acc * (1.0 - a[j] * a[j]);  // through tanh
        }
      }
      delta = std::move(prev);
    }
  }
  return grad;
}

ModelParams sgd_step(const ModelParams& m, const ModelParams& grad, const SgdConfig& cfg) {
  require_same_layout(m, grad, "sgd_step");
  ModelParams out = m;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] -= cfg.learning_rate * grad.values[i];
  }
  check_finite(out, "sgd_step");
  return out;
}

Matrix one_hot(const std::vector<int>& labels, int classes) {
  Matrix m(static_cast<int>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      throw ContractError("one_hot: label " + std::to_string(labels[i]) + " out of range");
    }
    m(static_cast<int>(i), labels[i]) = 1.0;
  }
  return m;
}

int argmax_row(const double* row, int n) {
  int best = 0;
  for (int c = 1; c < n; ++c) {
    if (row[c] > row[best]) best = c;
  }
  return best;
}

}  // namespace fedmix
