#include "fedmix/federation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <string>

#include "fedmix/errors.hpp"
#include "fedmix/evaluation.hpp"
#include "fedmix/rng.hpp"

namespace fedmix {

Aggregator parse_aggregator(const std::string& name) {
  if (name == "fedmix+fedfreq") return Aggregator::fedmix_fedfreq;
  if (name == "fedmix+fedavg-weights") return Aggregator::fedmix_fedavg_weights;
  if (name == "naive-decomposition") return Aggregator::naive_decomposition;
  if (name == "fedavg-supervised-only") return Aggregator::fedavg_supervised_only;
  throw ConfigError("unknown aggregator '" + name +
                    "' (expected fedmix+fedfreq, fedmix+fedavg-weights, "
                    "naive-decomposition or fedavg-supervised-only)");
}

std::string aggregator_name(Aggregator a) {
  switch (a) {
    case Aggregator::fedmix_fedfreq: return "fedmix+fedfreq";
    case Aggregator::fedmix_fedavg_weights: return "fedmix+fedavg-weights";
    case Aggregator::naive_decomposition: return "naive-decomposition";
    case Aggregator::fedavg_supervised_only: return "fedavg-supervised-only";
  }
  throw ConfigError("unknown aggregator enum value");
}

void FederationConfig::validate() const {
  if (client_count < 1) throw ConfigError("federation: client_count must be >= 1");
  if (!(participation > 0.0) || participation > 1.0) {
    throw ConfigError("federation: participation must be in (0, 1]");
  }
  if (rounds < 1) throw ConfigError("federation: rounds must be >= 1");
  if (mix_alpha < 0.0 || mix_beta < 0.0 || mix_gamma < 0.0) {
    throw ConfigError("federation: mixing coefficients must be >= 0");
  }
  if (std::abs(mix_alpha + mix_beta + mix_gamma - 1.0) > 1e-9) {
    throw ConfigError("federation: mixing coefficients must sum to 1");
  }
  server_sgd.validate();
  client_sgd.validate();
}

FreqWeights fedfreq_weights(const std::vector<int>& selected_q) {
  const std::size_t S = selected_q.size();
  if (S == 0) throw ContractError("fedfreq_weights: empty cohort");
  for (int q : selected_q) {
    if (q < 1) throw ContractError("fedfreq_weights: q must be >= 1 once selected");
  }
  FreqWeights out;
  out.p.resize(S);
  out.w.resize(S);
  std::int64_t total = 0;
  for (int q : selected_q) total += q;
  for (std::size_t k = 0; k < S; ++k) {
    out.p[k] = static_cast<double>(selected_q[k]) / static_cast<double>(total);
  }
  if (S == 1) {
    out.w[0] = 1.0;
    return out;
  }
  // w_k = (1 - p_k) / (|S| - 1) evaluated on integers: (total - q_k) and
  // total * (|S| - 1) are exact, so each weight is one correctly rounded
  // division and equal frequencies give exactly 1/|S|.
  const double denom = static_cast<double>(total * static_cast<std::int64_t>(S - 1));
  for (std::size_t k = 0; k < S; ++k) {
    out.w[k] = static_cast<double>(total - selected_q[k]) / denom;
  }
  return out;
}

std::vector<double> count_weights(const std::vector<int>& counts) {
  if (counts.empty()) throw ContractError("count_weights: empty cohort");
  std::int64_t total = 0;
  for (int c : counts) {
    if (c < 1) throw ContractError("count_weights: counts must be >= 1");
    total += c;
  }
  std::vector<double> w(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    w[k] = static_cast<double>(counts[k]) / static_cast<double>(total);
  }
  return w;
}

ModelParams aggregate_weighted(const std::vector<ModelParams>& models,
                               const std::vector<double>& weights) {
  if (models.empty()) throw ContractError("aggregate_weighted: no models");
  if (models.size() != weights.size()) {
    throw ShapeError("aggregate_weighted: model/weight count mismatch");
  }
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ContractError("aggregate_weighted: negative weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) {
    throw ContractError("aggregate_weighted: weights sum to " + std::to_string(wsum));
  }
  ModelParams out = zeros_like(models.front());
  for (std::size_t k = 0; k < models.size(); ++k) {
    require_same_layout(out, models[k], "aggregate_weighted");
    axpy(out, weights[k], models[k]);
  }
  return out;
}

ModelParams fedmix_mix(const ModelParams& psi, const ModelParams& sigma,
                       const ModelParams& omega_prev, double alpha, double beta,
                       double gamma) {
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0) {
    throw ConfigError("fedmix_mix: coefficients must be >= 0");
  }
  if (std::abs(alpha + beta + gamma - 1.0) > 1e-9) {
    throw ConfigError("fedmix_mix: coefficients must sum to 1");
  }
  require_same_layout(psi, sigma, "fedmix_mix");
  require_same_layout(psi, omega_prev, "fedmix_mix");
  ModelParams out = zeros_like(psi);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = alpha * psi.values[i] + beta * sigma.values[i] + gamma * omega_prev.values[i];
  }
  return out;
}

int selection_size(const FederationConfig& cfg) {
  const int m = static_cast<int>(std::lround(cfg.participation * cfg.client_count));
  return std::clamp(m, 1, cfg.client_count);
}

std::vector<int> select_clients(std::vector<ClientState>& clients, int count,
                                std::uint64_t seed) {
  if (count < 1 || count > static_cast<int>(clients.size())) {
    throw ContractError("select_clients: count out of range");
  }
  Rng rng = make_rng(seed);
  std::vector<int> picks =
      sample_without_replacement(rng, static_cast<int>(clients.size()), count);
  std::sort(picks.begin(), picks.end());
  for (int idx : picks) ++clients[static_cast<std::size_t>(idx)].q;
  return picks;
}

double server_train(ServerState& server, const LossWeights& weights, const SgdConfig& sgd,
                    std::uint64_t seed) {
  sgd.validate();
  server.labeled.validate();
  server.sigma = server.omega;

  const int n = server.labeled.size();
  const Matrix targets = one_hot(server.labeled.labels, server.labeled.class_count);

  if (sgd.epochs == 0) {
    Batch all;
    all.inputs = server.labeled.inputs;
    all.targets = targets;
    return supervised_loss(server.sigma, all, weights).value;
  }

  Rng rng = make_rng(derive_seed(seed, stream_tag("server-epochs")));
  double final_epoch_loss = 0.0;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < sgd.epochs; ++epoch) {
    shuffle_indices(rng, order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += sgd.batch_size) {
      const int stop = std::min(n, start + sgd.batch_size);
      std::vector<int> rows(order.begin() + start, order.begin() + stop);
      Batch b;
      b.inputs = server.labeled.inputs.take_rows(rows);
      b.targets = targets.take_rows(rows);
      const LossResult r = supervised_loss(server.sigma, b, weights);
      server.sigma = sgd_step(server.sigma, r.gradient, sgd);
      epoch_loss += r.value;
      ++batches;
    }
    if (epoch == sgd.epochs - 1 && batches > 0) final_epoch_loss = epoch_loss / batches;
  }
  return final_epoch_loss;
}

ClientUpdateResult client_update(const ClientState& client, const ModelParams& omega,
                                 const ModelParams& sigma, const TrainingContext& ctx,
                                 std::uint64_t seed) {
  ClientUpdateResult out;
  out.id = client.id;
  out.psi = omega;
  out.sample_count = client.shard.inputs.rows();
  if (out.sample_count == 0) {
    out.empty_shard = true;
    return out;
  }

  UnsupLossOptions opts;
  opts.weights = ctx.loss;
  opts.consistency = ctx.consistency;
  opts.view1 = ctx.view1;
  opts.view2 = ctx.view2;

  const SgdConfig& sgd = ctx.fed.client_sgd;
  const int n = out.sample_count;
  const int epochs = std::max(sgd.epochs, 0);

  Rng rng = make_rng(derive_seed(seed, stream_tag("client-epochs")));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  PseudoLabelBatch pl;
  try {
    for (int epoch = 0; epoch < std::max(epochs, 1); ++epoch) {
      // Relabel with the current local model; labels then stay fixed for the
      // epoch's steps.
      pl = make_pseudo_labels(out.psi, client.shard.inputs, ctx.family, ctx.pseudo,
                              derive_seed(seed, stream_tag("labels"), epoch));
      if (epochs == 0) break;  // psi stays omega; labels exist for metrics only

      shuffle_indices(rng, order);
      double epoch_pseudo = 0.0, epoch_cons = 0.0, epoch_prox = 0.0, epoch_total = 0.0;
      int batches = 0;
      for (int start = 0; start < n; start += sgd.batch_size) {
        const int stop = std::min(n, start + sgd.batch_size);
        std::vector<int> rows(order.begin() + start, order.begin() + stop);
        const Matrix batch_inputs = client.shard.inputs.take_rows(rows);

        // Restrict the accepted set to this batch's rows.
        PseudoLabelBatch sub;
        sub.predicted_class.reserve(rows.size());
        sub.confidence.reserve(rows.size());
        std::vector<int> local_keep;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const int src = rows[i];
          sub.predicted_class.push_back(pl.predicted_class[static_cast<std::size_t>(src)]);
          sub.confidence.push_back(pl.confidence[static_cast<std::size_t>(src)]);
          sub.accepted_mask.push_back(pl.accepted_mask[static_cast<std::size_t>(src)]);
          if (pl.accepted_mask[static_cast<std::size_t>(src)]) {
            local_keep.push_back(static_cast<int>(i));
            sub.accepted_rows.push_back(static_cast<int>(i));
          }
        }
        sub.accepted_inputs = batch_inputs.take_rows(local_keep);
        sub.one_hot_labels = Matrix(static_cast<int>(local_keep.size()), omega.output_dim());
        for (std::size_t i = 0; i < local_keep.size(); ++i) {
          sub.one_hot_labels(static_cast<int>(i),
                             sub.predicted_class[static_cast<std::size_t>(local_keep[i])]) = 1.0;
        }
        sub.acceptance_rate = rows.empty() ? 0.0
                                           : static_cast<double>(local_keep.size()) /
                                                 static_cast<double>(rows.size());

        LossBreakdown bd;
        const LossResult r =
            unsupervised_loss(out.psi, batch_inputs, sub, sigma, opts,
                              derive_seed(seed, stream_tag("steps"), epoch, batches), &bd);
        out.psi = sgd_step(out.psi, r.gradient, sgd);
        epoch_pseudo += bd.pseudo_ce;
        epoch_cons += bd.consistency;
        epoch_prox += bd.proximal;
        epoch_total += bd.total;
        ++batches;
      }
      if (epoch == epochs - 1 && batches > 0) {
        out.losses.pseudo_ce = epoch_pseudo / batches;
        out.losses.consistency = epoch_cons / batches;
        out.losses.proximal = epoch_prox / batches;
        out.losses.total = epoch_total / batches;
      }
    }
  } catch (const NumericalError&) {
    out.finite = false;
    return out;
  }

  out.acceptance_rate = pl.acceptance_rate;
  out.precision = pseudo_label_precision(pl, client.shard.sealed_labels);
  out.labeler_accuracy = pseudo_label_accuracy(pl, client.shard.sealed_labels);
  return out;
}

RoundMetrics run_round(ServerState& server, std::vector<ClientState>& clients,
                       const TrainingContext& ctx) {
  ctx.fed.validate();
  ctx.loss.validate();
  ctx.pseudo.validate();

  const int t = server.round;
  RoundMetrics m;
  m.round = t;

  m.loss_supervised = server_train(server, ctx.loss, ctx.fed.server_sgd,
                                   derive_seed(ctx.seed, stream_tag("server"), t));

  if (ctx.fed.aggregator == Aggregator::fedavg_supervised_only) {
    server.omega = server.sigma;
  } else {
    if (static_cast<int>(clients.size()) != ctx.fed.client_count) {
      throw ContractError("run_round: client list does not match configured count");
    }
    const int count = selection_size(ctx.fed);
    m.selected = select_clients(clients, count, derive_seed(ctx.seed, stream_tag("select"), t));

    std::vector<ClientUpdateResult> results(m.selected.size());
    auto job = [&](std::size_t slot) {
      const int id = m.selected[slot];
      results[slot] = client_update(clients[static_cast<std::size_t>(id)], server.omega,
                                    server.sigma, ctx,
                                    derive_seed(ctx.seed, stream_tag("client"), t, id));
    };
    if (ctx.fed.parallel_clients && m.selected.size() > 1) {
      std::vector<std::future<void>> futs;
      futs.reserve(m.selected.size());
      for (std::size_t i = 0; i < m.selected.size(); ++i) {
        futs.push_back(std::async(std::launch::async, job, i));
      }
      for (auto& f : futs) f.get();
    } else {
      for (std::size_t i = 0; i < m.selected.size(); ++i) job(i);
    }

    std::vector<const ClientUpdateResult*> uploaders;
    for (const auto& r : results) {
      if (r.finite && !r.empty_shard) {
        uploaders.push_back(&r);
      } else {
        m.dropped.push_back(r.id);
      }
    }

    ModelParams psi_global;
    if (uploaders.empty()) {
      psi_global = server.omega;  // nothing reported back this round
      m.precision = 1.0;
    } else {
      std::vector<ModelParams> models;
      std::vector<double> weights;
      models.reserve(uploaders.size());
      if (ctx.fed.aggregator == Aggregator::fedmix_fedfreq) {
        std::vector<int> qs;
        for (const auto* r : uploaders) {
          qs.push_back(clients[static_cast<std::size_t>(r->id)].q);
        }
        weights = fedfreq_weights(qs).w;
      } else {
        std::vector<int> counts;
        for (const auto* r : uploaders) counts.push_back(r->sample_count);
        weights = count_weights(counts);
      }
      for (const auto* r : uploaders) models.push_back(r->psi);
      psi_global = aggregate_weighted(models, weights);

      m.precision = 0.0;  // header default is the vacuous 1.0
      for (const auto* r : uploaders) {
        m.loss_unsupervised += r->losses.total;
        m.loss_pseudo_ce += r->losses.pseudo_ce;
        m.loss_consistency += r->losses.consistency;
        m.loss_proximal += r->losses.proximal;
        m.acceptance += r->acceptance_rate;
        m.precision += r->precision;
        m.labeler_accuracy += r->labeler_accuracy;
      }
      const double inv = 1.0 / static_cast<double>(uploaders.size());
      m.loss_unsupervised *= inv;
      m.loss_pseudo_ce *= inv;
      m.loss_consistency *= inv;
      m.loss_proximal *= inv;
      m.acceptance *= inv;
      m.precision *= inv;
      m.labeler_accuracy *= inv;
    }

    double alpha = ctx.fed.mix_alpha;
    double beta = ctx.fed.mix_beta;
    double gamma = ctx.fed.mix_gamma;
    if (ctx.fed.aggregator == Aggregator::naive_decomposition) {
      alpha = 0.5;
      beta = 0.5;
      gamma = 0.0;
    }
    server.omega = fedmix_mix(psi_global, server.sigma, server.omega, alpha, beta, gamma);

    if (ctx.test != nullptr) {
      m.acc_unsup_global = uploaders.empty() ? 0.0 : evaluate(psi_global, *ctx.test).accuracy;
    }
  }

  if (ctx.test != nullptr) {
    m.acc_global = evaluate(server.omega, *ctx.test).accuracy;
    m.acc_supervised = evaluate(server.sigma, *ctx.test).accuracy;
  }

  for (const auto& c : clients) m.q_snapshot.push_back(c.q);
  server.round = t + 1;
  return m;
}

std::vector<ClientState> build_clients(const Dataset& unlabeled, const PartitionPlan& plan) {
  std::vector<ClientState> clients;
  clients.reserve(plan.clients.size());
  for (std::size_t k = 0; k < plan.clients.size(); ++k) {
    ClientState c;
    c.id = static_cast<int>(k);
    c.shard.inputs = unlabeled.inputs.take_rows(plan.clients[k].sample_indices);
    c.shard.sealed_labels.reserve(plan.clients[k].sample_indices.size());
    for (int idx : plan.clients[k].sample_indices) {
      c.shard.sealed_labels.push_back(unlabeled.labels[static_cast<std::size_t>(idx)]);
    }
    clients.push_back(std::move(c));
  }
  return clients;
}

}  // namespace fedmix
