#pragma once

#include <vector>

#include "fedmix/dataset.hpp"
#include "fedmix/loss.hpp"
#include "fedmix/nn.hpp"
#include "fedmix/partition.hpp"

namespace fedmix {

struct EvalReport {
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;   // 0 for classes absent from the set
  std::vector<std::vector<int>> confusion;  // [true][predicted]
  int total = 0;
};

EvalReport evaluate(const ModelParams& model, const Dataset& test);

// Fraction of accepted pseudo labels that match the sealed ground truth for
// their source rows. Defined as 1 when nothing was accepted.
double pseudo_label_precision(const PseudoLabelBatch& pl, const std::vector<int>& truth);

// Fraction of all rows whose (unthresholded) pseudo-label prediction matches
// the sealed truth, i.e. the labeler's accuracy before filtering.
double pseudo_label_accuracy(const PseudoLabelBatch& pl, const std::vector<int>& truth);

struct PartitionReport {
  std::vector<std::vector<int>> class_histograms;  // per client
  std::vector<int> effective_classes;              // classes with >= 1 sample
  std::vector<int> shard_sizes;
};

PartitionReport partition_report(const PartitionPlan& plan, const Dataset& pool);

}  // namespace fedmix
