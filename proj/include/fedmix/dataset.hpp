#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fedmix/matrix.hpp"

namespace fedmix {

struct Dataset {
  Matrix inputs;
  std::vector<int> labels;
  int class_count = 0;

  int size() const { return inputs.rows(); }
  int input_dim() const { return inputs.cols(); }
  void validate() const;
};

// C Gaussian blobs with unit-separated means; class-balanced, class-major
// order. With input_dim >= classes the means sit on scaled one-hot corners,
// otherwise on seeded random unit directions. spread is the per-coordinate
// noise stddev; spread = 0 reproduces the means exactly.
Dataset make_synthetic(int classes, int per_class, int input_dim, double spread,
                       std::uint64_t seed);

// CIFAR-10 binary batches: records of 1 label byte + 3072 channel-planar
// pixel bytes. Pixels scale to [0, 1]. Throws FormatError on truncation
// (message carries the byte offset) or on a label outside 0..9.
Dataset load_cifar10(const std::string& path);

// Splits off a class-balanced labeled set (n_labeled / class_count each).
// Returns {labeled, unlabeled}; the unlabeled half keeps the pool's relative
// order and retains its labels only as sealed ground truth for evaluation.
std::pair<Dataset, Dataset> split_labeled(const Dataset& pool, int n_labeled,
                                          std::uint64_t seed);

}  // namespace fedmix
