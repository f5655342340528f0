#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "fedmix/matrix.hpp"
#include "fedmix/nn.hpp"
#include "fedmix/rng.hpp"

namespace testutil {

// Central finite differences over every parameter.
inline std::vector<double> numeric_gradient(
    const std::function<double(const fedmix::ModelParams&)>& f, const fedmix::ModelParams& m,
    double eps = 1e-5) {
  std::vector<double> g(m.values.size());
  fedmix::ModelParams probe = m;
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    probe.values[i] = m.values[i] + eps;
    const double hi = f(probe);
    probe.values[i] = m.values[i] - eps;
    const double lo = f(probe);
    probe.values[i] = m.values[i];
    g[i] = (hi - lo) / (2.0 * eps);
  }
  return g;
}

// rel = |a - n| / max(max(|a|, |n|), floor); the floor keeps near-zero
// coordinates from blowing up the ratio.
inline double max_rel_error(const std::vector<double>& analytic,
                            const std::vector<double>& numeric, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max(std::max(std::abs(analytic[i]), std::abs(numeric[i])), floor);
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

inline fedmix::Matrix random_matrix(fedmix::Rng& rng, int rows, int cols, double scale = 1.0) {
  fedmix::Matrix m(rows, cols);
  for (double& v : m.data()) v = scale * fedmix::normal01(rng);
  return m;
}

inline fedmix::ModelParams random_model(std::uint64_t seed, int input_dim,
                                        const std::vector<int>& hidden, int classes,
                                        double perturb = 0.0) {
  fedmix::ModelParams m = fedmix::init_model(input_dim, hidden, classes, seed);
  if (perturb > 0.0) {
    fedmix::Rng rng = fedmix::make_rng(fedmix::derive_seed(seed, fedmix::stream_tag("perturb")));
    for (double& v : m.values) v += perturb * fedmix::normal01(rng);
  }
  return m;
}

}  // namespace testutil
