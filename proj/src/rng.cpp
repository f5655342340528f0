#include "fedmix/rng.hpp"

#include <cmath>

#include "fedmix/errors.hpp"

namespace fedmix {

double normal01(Rng& rng) {
  // Box-Muller, cosine branch only. One fresh pair per call keeps call sites
  // independent of each other's draw counts.
  const double u1 = uniform_pos(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

double gamma_sample(Rng& rng, double alpha) {
  if (!(alpha > 0.0)) throw ContractError("gamma_sample: alpha must be > 0");
  if (alpha < 1.0) {
    const double boost = std::pow(uniform_pos(rng), 1.0 / alpha);
    return gamma_sample(rng, alpha + 1.0) * boost;
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal01(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

int uniform_index(Rng& rng, int n) {
  if (n <= 0) throw ContractError("uniform_index: n must be > 0");
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % un;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<int>(x % un);
}

void shuffle_indices(Rng& rng, std::vector<int>& v) {
  for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
    const int j = uniform_index(rng, i + 1);
    std::swap(v[i], v[static_cast<std::size_t>(j)]);
  }
}

std::vector<int> sample_without_replacement(Rng& rng, int population, int count) {
  if (count < 0 || count > population) {
    throw ContractError("sample_without_replacement: count out of range");
  }
  std::vector<int> pool(static_cast<std::size_t>(population));
  for (int i = 0; i < population; ++i) pool[static_cast<std::size_t>(i)] = i;
  // Partial Fisher-Yates: the first `count` slots end up uniformly drawn.
  for (int i = 0; i < count; ++i) {
    const int j = i + uniform_index(rng, population - i);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

}  // namespace fedmix
