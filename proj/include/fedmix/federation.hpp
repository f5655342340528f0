#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedmix/dataset.hpp"
#include "fedmix/loss.hpp"
#include "fedmix/nn.hpp"
#include "fedmix/partition.hpp"

namespace fedmix {

// fedmix_fedfreq        - full method: frequency-weighted client aggregation
//                         mixed with the server model (three-way).
// fedmix_fedavg_weights - ablation: same mixing, sample-count weights.
// naive_decomposition   - baseline: count-weighted clients, fixed 50/50 mix
//                         of client and server models, no self term.
// fedavg_supervised_only- floor: no clients at all, omega tracks sigma.
enum class Aggregator {
  fedmix_fedfreq,
  fedmix_fedavg_weights,
  naive_decomposition,
  fedavg_supervised_only,
};

Aggregator parse_aggregator(const std::string& name);
std::string aggregator_name(Aggregator a);

struct FederationConfig {
  int client_count = 20;
  double participation = 0.25;  // fraction selected per round
  int rounds = 50;
  double mix_alpha = 0.5;  // weight on the aggregated client model
  double mix_beta = 0.3;   // weight on the server-trained model
  double mix_gamma = 0.2;  // weight on the previous global model
  Aggregator aggregator = Aggregator::fedmix_fedfreq;
  SgdConfig server_sgd{0.5, 32, 1};
  SgdConfig client_sgd{0.5, 32, 1};
  bool parallel_clients = true;

  void validate() const;
};

struct ClientShard {
  Matrix inputs;
  std::vector<int> sealed_labels;  // ground truth, never trained on
};

struct ClientState {
  int id = 0;
  ClientShard shard;
  int q = 0;  // selection count, drives FedFreq
};

struct ServerState {
  ModelParams omega;  // global model
  ModelParams sigma;  // server-trained supervised model
  Dataset labeled;
  int round = 0;
};

// Everything a round needs besides the mutable state.
struct TrainingContext {
  FederationConfig fed;
  LossWeights loss;
  PseudoLabelConfig pseudo;
  AugmentFamily family;  // views for pseudo-labeling
  ConsistencyKind consistency = ConsistencyKind::l2;
  AugmentSpec view1;
  AugmentSpec view2;
  const Dataset* test = nullptr;  // optional; enables accuracy metrics
  std::uint64_t seed = 0;
};

// Frequency-discounting weights over the selected cohort: p_k = q_k / sum(q),
// w_k = (1 - p_k) / (|S| - 1). Computed from the integer q so that equal
// frequencies reduce to exactly 1/|S|. A single client gets weight 1.
struct FreqWeights {
  std::vector<double> p;
  std::vector<double> w;
};
FreqWeights fedfreq_weights(const std::vector<int>& selected_q);

// Sample-count proportional weights (classic FedAvg).
std::vector<double> count_weights(const std::vector<int>& counts);

// Weighted sum of parameter vectors; weights must sum to 1 (1e-9).
ModelParams aggregate_weighted(const std::vector<ModelParams>& models,
                               const std::vector<double>& weights);

// omega_next = alpha * psi + beta * sigma + gamma * omega_prev.
// Coefficients must be non-negative and sum to 1 (1e-9).
ModelParams fedmix_mix(const ModelParams& psi, const ModelParams& sigma,
                       const ModelParams& omega_prev, double alpha, double beta, double gamma);

// round(participation * client_count), clamped to [1, client_count].
int selection_size(const FederationConfig& cfg);

// Draws the round's cohort without replacement, bumps each q, returns the
// ids sorted ascending.
std::vector<int> select_clients(std::vector<ClientState>& clients, int count,
                                std::uint64_t seed);

// Refreshes sigma from omega and runs the supervised epochs over the labeled
// set. Returns the mean per-batch loss of the final epoch (a plain forward
// evaluation when epochs == 0).
double server_train(ServerState& server, const LossWeights& weights, const SgdConfig& sgd,
                    std::uint64_t seed);

struct ClientUpdateResult {
  int id = 0;
  ModelParams psi;
  bool finite = true;       // false => diverged, dropped from aggregation
  bool empty_shard = false;
  LossBreakdown losses;     // final-epoch means
  double acceptance_rate = 0.0;
  double precision = 1.0;          // accepted pseudo labels vs sealed truth
  double labeler_accuracy = 0.0;   // unthresholded predictions vs sealed truth
  int sample_count = 0;
};

// Local training from omega: each epoch pseudo-labels the shard with the
// current local model, then takes SGD steps on the unsupervised objective.
ClientUpdateResult client_update(const ClientState& client, const ModelParams& omega,
                                 const ModelParams& sigma, const TrainingContext& ctx,
                                 std::uint64_t seed);

struct RoundMetrics {
  int round = 0;
  double acc_global = 0.0;      // omega after the round
  double acc_supervised = 0.0;  // sigma
  double acc_unsup_global = 0.0;  // aggregated client model
  double loss_supervised = 0.0;
  double loss_unsupervised = 0.0;
  double loss_pseudo_ce = 0.0;
  double loss_consistency = 0.0;
  double loss_proximal = 0.0;
  double acceptance = 0.0;
  double precision = 1.0;
  double labeler_accuracy = 0.0;
  std::vector<int> selected;
  std::vector<int> dropped;
  std::vector<int> q_snapshot;
};

RoundMetrics run_round(ServerState& server, std::vector<ClientState>& clients,
                       const TrainingContext& ctx);

std::vector<ClientState> build_clients(const Dataset& unlabeled, const PartitionPlan& plan);

}  // namespace fedmix
