#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedmix/dataset.hpp"
#include "fedmix/rng.hpp"

namespace fedmix {

struct DirichletConfig {
  double mu = 0.5;
  int client_count = 20;
  std::uint64_t seed = 0;
  bool quantity_imbalance = false;

  void validate() const;
};

struct ClientAllocation {
  std::vector<double> class_proportions;  // drawn target mix, sums to 1
  std::vector<int> sample_indices;        // rows into the unlabeled pool
  int reassigned = 0;  // samples delivered from a different class than targeted
};

struct PartitionPlan {
  std::vector<ClientAllocation> clients;
  int reassigned_total = 0;
  int shortfall = 0;  // pool samples left unassigned (0 by construction)
};

// One symmetric Dirichlet(mu) draw of the given dimension.
std::vector<double> sample_dirichlet(double mu, int dim, Rng& rng);

// Integer apportionment of `total` across weights by largest remainder.
std::vector<int> largest_remainder_counts(const std::vector<double>& weights, int total);

// Per-client class mixes drawn from Dirichlet(mu); every pool sample is
// assigned to exactly one client. When a class is collectively over-demanded
// the requests are scaled down proportionally and the residual counts are
// filled from classes with leftover supply (tracked as `reassigned`).
// quantity_imbalance additionally draws per-client totals from Dirichlet(mu)
// instead of an even split. Smaller mu = more skew.
PartitionPlan dirichlet_partition(const Dataset& unlabeled, const DirichletConfig& cfg);

// Stable JSON rendering (sorted indices, fixed key order, 6-decimal
// proportions) used for golden-file comparisons.
std::string plan_to_json(const PartitionPlan& plan);

}  // namespace fedmix
