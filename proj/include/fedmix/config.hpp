#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedmix/federation.hpp"
#include "fedmix/loss.hpp"

namespace fedmix {

// Full experiment description. Defaults are the desk-scale setup: 10-class
// synthetic blobs, 2000 unlabeled / 200 labeled / 400 test, 20 clients at 25%
// participation for 50 rounds.
struct ExperimentConfig {
  // [dataset]
  std::string dataset_kind = "synthetic";  // synthetic | cifar10
  int classes = 10;
  int per_class = 260;
  int input_dim = 32;
  double spread = 0.35;
  std::string data_path;  // cifar10 batch file

  // [split]
  int n_labeled = 150;
  int n_test = 400;

  // [partition]
  double mu = 0.5;
  bool quantity_imbalance = false;

  // [federation] + [server_sgd] + [client_sgd]
  FederationConfig fed;

  // [loss]
  LossWeights loss;
  std::string consistency = "l2";  // l2 | kl

  // [pseudo_label]
  PseudoLabelConfig pseudo;

  // [augment]
  std::string augment_family = "auto";  // auto | jitter | image | identity
  double jitter_scale = 0.05;           // times the pool feature stddev
  double shift_fraction = 0.1;

  // [model]
  std::vector<int> hidden = {64, 64};

  // [experiment]
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string name = "run";

  void validate() const;
};

// INI-style text: [section] headers, key = value lines, '#' comments.
// Unknown sections or keys raise ConfigError naming the offender.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical rendering; parse(serialize(cfg)) reproduces cfg.
std::string serialize_config(const ExperimentConfig& cfg);

// Applies one "section.key=value" override (CLI --set).
void apply_override(ExperimentConfig& cfg, const std::string& dotted_key,
                    const std::string& value);

}  // namespace fedmix
