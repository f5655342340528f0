#include "fedmix/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "fedmix/errors.hpp"

namespace fedmix {

void DirichletConfig::validate() const {
  if (!(mu > 0.0)) throw ConfigError("dirichlet: mu must be > 0");
  if (client_count < 1) throw ConfigError("dirichlet: client_count must be >= 1");
}

std::vector<double> sample_dirichlet(double mu, int dim, Rng& rng) {
  if (dim < 1) throw ContractError("sample_dirichlet: dim must be >= 1");
  std::vector<double> v(static_cast<std::size_t>(dim));
  double sum = 0.0;
  for (auto& x : v) {
    x = gamma_sample(rng, mu);
    sum += x;
  }
  if (sum <= 0.0) {
    // All gamma draws underflowed (only conceivable for extreme mu); fall
    // back to a point mass so the result still sums to 1.
    std::fill(v.begin(), v.end(), 0.0);
    v[static_cast<std::size_t>(uniform_index(rng, dim))] = 1.0;
    return v;
  }
  for (auto& x : v) x /= sum;
  return v;
}

std::vector<int> largest_remainder_counts(const std::vector<double>& weights, int total) {
  if (total < 0) throw ContractError("largest_remainder_counts: negative total");
  const std::size_t n = weights.size();
  std::vector<int> counts(n, 0);
  if (total == 0) return counts;
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ContractError("largest_remainder_counts: negative weight");
    wsum += w;
  }
  if (wsum <= 0.0) throw ContractError("largest_remainder_counts: weights sum to 0");

  std::vector<double> frac(n);
  int assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share = weights[i] / wsum * static_cast<double>(total);
    counts[i] = static_cast<int>(std::floor(share));
    frac[i] = share - std::floor(share);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&frac](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; assigned < total; ++i) {
    ++counts[order[i % n]];
    ++assigned;
  }
  return counts;
}

PartitionPlan dirichlet_partition(const Dataset& unlabeled, const DirichletConfig& cfg) {
  cfg.validate();
  unlabeled.validate();
  const int N = unlabeled.size();
  if (N == 0) throw CapacityError("dirichlet_partition: empty pool");
  const int K = cfg.client_count;
  const int C = unlabeled.class_count;

  PartitionPlan plan;
  plan.clients.resize(static_cast<std::size_t>(K));

  if (K == 1) {
    auto& only = plan.clients[0];
    only.class_proportions.assign(static_cast<std::size_t>(C), 0.0);
    only.sample_indices.resize(static_cast<std::size_t>(N));
    std::iota(only.sample_indices.begin(), only.sample_indices.end(), 0);
    for (int lbl : unlabeled.labels) {
      only.class_proportions[static_cast<std::size_t>(lbl)] += 1.0 / static_cast<double>(N);
    }
    return plan;
  }

  Rng rng = make_rng(derive_seed(cfg.seed, stream_tag("dirichlet partition")));

  for (auto& client : plan.clients) {
    client.class_proportions = sample_dirichlet(cfg.mu, C, rng);
  }

  std::vector<int> totals;
  if (cfg.quantity_imbalance && N >= K) {
    // Guarantee one sample each, spread the rest by a Dirichlet(mu) draw.
    const std::vector<double> share = sample_dirichlet(cfg.mu, K, rng);
    totals = largest_remainder_counts(share, N - K);
    for (auto& t : totals) ++t;
  } else {
    totals = largest_remainder_counts(std::vector<double>(static_cast<std::size_t>(K), 1.0), N);
  }

  std::vector<std::vector<int>> desired(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    desired[static_cast<std::size_t>(k)] =
        largest_remainder_counts(plan.clients[static_cast<std::size_t>(k)].class_proportions,
                                 totals[static_cast<std::size_t>(k)]);
  }

  std::vector<std::vector<int>> pools(static_cast<std::size_t>(C));
  for (int i = 0; i < N; ++i) {
    pools[static_cast<std::size_t>(unlabeled.labels[static_cast<std::size_t>(i)])].push_back(i);
  }
  for (auto& p : pools) shuffle_indices(rng, p);
  std::vector<std::size_t> cursor(static_cast<std::size_t>(C), 0);

  // Stage 1: grant requests per class; when a class is over-demanded, scale
  // the competing requests down proportionally (largest remainder again).
  std::vector<std::vector<int>> granted(static_cast<std::size_t>(K),
                                        std::vector<int>(static_cast<std::size_t>(C), 0));
  for (int c = 0; c < C; ++c) {
    const int avail = static_cast<int>(pools[static_cast<std::size_t>(c)].size());
    long demand = 0;
    for (int k = 0; k < K; ++k) demand += desired[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
    if (demand <= avail) {
      for (int k = 0; k < K; ++k) {
        granted[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)] =
            desired[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
      }
    } else if (avail > 0) {
      std::vector<double> w(static_cast<std::size_t>(K));
      for (int k = 0; k < K; ++k) {
        w[static_cast<std::size_t>(k)] =
            static_cast<double>(desired[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)]);
      }
      const std::vector<int> cut = largest_remainder_counts(w, avail);
      for (int k = 0; k < K; ++k) {
        granted[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)] =
            cut[static_cast<std::size_t>(k)];
      }
    }
  }

  auto take = [&](int k, int c, int n) {
    auto& pool = pools[static_cast<std::size_t>(c)];
    auto& cur = cursor[static_cast<std::size_t>(c)];
    auto& dst = plan.clients[static_cast<std::size_t>(k)].sample_indices;
    for (int i = 0; i < n; ++i) dst.push_back(pool[cur++]);
  };
  for (int k = 0; k < K; ++k) {
    for (int c = 0; c < C; ++c) take(k, c, granted[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)]);
  }

  // Stage 2: top up short clients from classes with leftover supply.
  std::vector<int> remaining(static_cast<std::size_t>(C));
  int remaining_total = 0;
  for (int c = 0; c < C; ++c) {
    remaining[static_cast<std::size_t>(c)] =
        static_cast<int>(pools[static_cast<std::size_t>(c)].size() - cursor[static_cast<std::size_t>(c)]);
    remaining_total += remaining[static_cast<std::size_t>(c)];
  }
  for (int k = 0; k < K; ++k) {
    auto& client = plan.clients[static_cast<std::size_t>(k)];
    int deficit = totals[static_cast<std::size_t>(k)] - static_cast<int>(client.sample_indices.size());
    if (deficit <= 0) continue;
    const int fill_total = std::min(deficit, remaining_total);
    if (fill_total > 0) {
      std::vector<double> w(remaining.begin(), remaining.end());
      const std::vector<int> fill = largest_remainder_counts(w, fill_total);
      for (int c = 0; c < C; ++c) {
        const int n = fill[static_cast<std::size_t>(c)];
        if (n == 0) continue;
        take(k, c, n);
        remaining[static_cast<std::size_t>(c)] -= n;
        client.reassigned += n;
      }
      remaining_total -= fill_total;
      plan.reassigned_total += fill_total;
    }
  }
  plan.shortfall = remaining_total;

  for (auto& client : plan.clients) {
    std::sort(client.sample_indices.begin(), client.sample_indices.end());
  }
  return plan;
}

std::string plan_to_json(const PartitionPlan& plan) {
  std::string out = "{\"clients\":[";
  char buf[32];
  for (std::size_t k = 0; k < plan.clients.size(); ++k) {
    const auto& c = plan.clients[k];
    if (k > 0) out += ',';
    out += "{\"id\":" + std::to_string(k) + ",\"proportions\":[";
    for (std::size_t i = 0; i < c.class_proportions.size(); ++i) {
      if (i > 0) out += ',';
      std::snprintf(buf, sizeof buf, "%.6f", c.class_proportions[i]);
      out += buf;
    }
    out += "],\"reassigned\":" + std::to_string(c.reassigned) + ",\"samples\":[";
    for (std::size_t i = 0; i < c.sample_indices.size(); ++i) {
      if (i > 0) out += ',';
      out += std::to_string(c.sample_indices[i]);
    }
    out += "]}";
  }
  out += "],\"reassigned_total\":" + std::to_string(plan.reassigned_total);
  out += ",\"shortfall\":" + std::to_string(plan.shortfall) + "}";
  return out;
}

}  // namespace fedmix
