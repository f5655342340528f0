#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedmix/config.hpp"
#include "fedmix/evaluation.hpp"
#include "fedmix/federation.hpp"

namespace fedmix {

// Everything one seeded run needs, materialized. ctx.test points at this
// struct's own test member, so instances must stay put once built.
struct RunSetup {
  Dataset labeled;
  Dataset unlabeled;
  Dataset test;
  PartitionPlan plan;
  std::vector<ClientState> clients;
  ServerState server;
  TrainingContext ctx;

  RunSetup() = default;
  RunSetup(const RunSetup&) = delete;
  RunSetup& operator=(const RunSetup&) = delete;
};

// Builds datasets, partition, clients and the initial models for one seed.
void build_run(const ExperimentConfig& cfg, std::uint64_t seed, RunSetup& out);

// The derived augmentation setup: labeling family plus the two consistency
// views, resolved against the dataset kind and pool statistics.
struct AugmentPlan {
  AugmentFamily family;
  AugmentSpec view1;
  AugmentSpec view2;
};
AugmentPlan resolve_augments(const ExperimentConfig& cfg, const Dataset& unlabeled);

struct RunResult {
  std::uint64_t seed = 0;
  double final_accuracy = 0.0;
  double best_accuracy = 0.0;
  int best_round = 0;
  std::filesystem::path dir;
  std::vector<RoundMetrics> rounds;
};

// Executes one seed end to end and writes config.ini, metrics.csv and
// summary.json into run_dir.
RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed,
                     const std::filesystem::path& run_dir);

// One run per configured seed under out_dir/<name>/seed<k>/, plus an
// experiment.json aggregate.
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg,
                                      const std::filesystem::path& out_dir);

// Repeats the experiment for each value of one overridable key, e.g.
// partition.mu over {0.1, 1, 10, 100}.
void run_grid(const ExperimentConfig& cfg, const std::string& dotted_key,
              const std::vector<std::string>& values, const std::filesystem::path& out_dir);

// Runs every aggregator on identical data/seeds and writes a side-by-side
// comparison (comparison.json + comparison.txt).
void run_comparison(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Flattens every metrics.csv under root into one long-format CSV
// (run,round,metric,value). Deterministic: inputs are visited in sorted
// order, so re-exporting identical runs yields identical bytes.
void export_curves(const std::filesystem::path& root, const std::filesystem::path& out_csv);

// Shared CSV plumbing (exposed for tests).
std::string metrics_csv_header();
std::string metrics_csv_row(const RoundMetrics& m);
std::string format_double_shortest(double v);

}  // namespace fedmix
