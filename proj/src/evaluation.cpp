#include "fedmix/evaluation.hpp"

#include <string>

#include "fedmix/errors.hpp"

namespace fedmix {

EvalReport evaluate(const ModelParams& model, const Dataset& test) {
  test.validate();
  if (test.class_count != model.output_dim()) {
    throw ShapeError("evaluate: dataset has " + std::to_string(test.class_count) +
                     " classes, model outputs " + std::to_string(model.output_dim()));
  }
  const int C = test.class_count;
  EvalReport rep;
  rep.total = test.size();
  rep.confusion.assign(static_cast<std::size_t>(C), std::vector<int>(static_cast<std::size_t>(C), 0));

  const Matrix probs = forward(model, test.inputs);
  int correct = 0;
  for (int r = 0; r < probs.rows(); ++r) {
    const int pred = argmax_row(probs.row(r), C);
    const int truth = test.labels[static_cast<std::size_t>(r)];
    ++rep.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
    if (pred == truth) ++correct;
  }
  rep.accuracy = rep.total == 0 ? 0.0 : static_cast<double>(correct) / rep.total;
  rep.per_class_accuracy.assign(static_cast<std::size_t>(C), 0.0);
  for (int c = 0; c < C; ++c) {
    int row_total = 0;
    for (int j = 0; j < C; ++j) row_total += rep.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
    if (row_total > 0) {
      rep.per_class_accuracy[static_cast<std::size_t>(c)] =
          static_cast<double>(rep.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)]) /
          row_total;
    }
  }
  return rep;
}

double pseudo_label_precision(const PseudoLabelBatch& pl, const std::vector<int>& truth) {
  if (truth.size() != pl.accepted_mask.size()) {
    throw ShapeError("pseudo_label_precision: truth size does not match batch");
  }
  if (pl.accepted_rows.empty()) return 1.0;
  int hit = 0;
  for (std::size_t i = 0; i < pl.accepted_rows.size(); ++i) {
    const int row = pl.accepted_rows[i];
    if (pl.predicted_class[static_cast<std::size_t>(row)] == truth[static_cast<std::size_t>(row)]) {
      ++hit;
    }
  }
  return static_cast<double>(hit) / static_cast<double>(pl.accepted_rows.size());
}

double pseudo_label_accuracy(const PseudoLabelBatch& pl, const std::vector<int>& truth) {
  if (truth.size() != pl.predicted_class.size()) {
    throw ShapeError("pseudo_label_accuracy: truth size does not match batch");
  }
  if (truth.empty()) return 0.0;
  int hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (pl.predicted_class[i] == truth[i]) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

PartitionReport partition_report(const PartitionPlan& plan, const Dataset& pool) {
  pool.validate();
  const int C = pool.class_count;
  PartitionReport rep;
  for (const auto& client : plan.clients) {
    std::vector<int> hist(static_cast<std::size_t>(C), 0);
    for (int idx : client.sample_indices) {
      if (idx < 0 || idx >= pool.size()) {
        throw ContractError("partition_report: sample index " + std::to_string(idx) +
                            " out of range");
      }
      ++hist[static_cast<std::size_t>(pool.labels[static_cast<std::size_t>(idx)])];
    }
    int effective = 0;
    for (int h : hist) effective += h > 0 ? 1 : 0;
    rep.shard_sizes.push_back(static_cast<int>(client.sample_indices.size()));
    rep.effective_classes.push_back(effective);
    rep.class_histograms.push_back(std::move(hist));
  }
  return rep;
}

}  // namespace fedmix
