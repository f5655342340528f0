#include "fedmix/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "fedmix/errors.hpp"
#include "fedmix/rng.hpp"

namespace fedmix {

void Dataset::validate() const {
  if (static_cast<int>(labels.size()) != inputs.rows()) {
    throw ShapeError("Dataset: label count does not match input rows");
  }
  if (class_count < 2) throw ContractError("Dataset: class_count must be >= 2");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) {
      throw ContractError("Dataset: label out of range at row " + std::to_string(i));
    }
  }
}

Dataset make_synthetic(int classes, int per_class, int input_dim, double spread,
                       std::uint64_t seed) {
  if (classes < 2) throw ContractError("make_synthetic: classes must be >= 2");
  if (per_class < 1) throw ContractError("make_synthetic: per_class must be >= 1");
  if (input_dim < 1) throw ContractError("make_synthetic: input_dim must be >= 1");
  if (spread < 0.0) throw ContractError("make_synthetic: spread must be >= 0");

  Matrix means(classes, input_dim);
  if (input_dim >= classes) {
    for (int c = 0; c < classes; ++c) means(c, c) = 1.0;
  } else {
    Rng mrng = make_rng(derive_seed(seed, stream_tag("blob-means")));
    for (int c = 0; c < classes; ++c) {
      double norm2 = 0.0;
      for (int d = 0; d < input_dim; ++d) {
        const double g = normal01(mrng);
        means(c, d) = g;
        norm2 += g * g;
      }
      const double inv = 1.0 / std::sqrt(std::max(norm2, 1e-30));
      for (int d = 0; d < input_dim; ++d) means(c, d) *= inv;
    }
  }

  Dataset ds;
  ds.class_count = classes;
  ds.inputs = Matrix(classes * per_class, input_dim);
  ds.labels.resize(static_cast<std::size_t>(classes) * per_class);
  Rng rng = make_rng(derive_seed(seed, stream_tag("blob-samples")));
  int row = 0;
  for (int c = 0; c < classes; ++c) {
    for (int i = 0; i < per_class; ++i, ++row) {
      double* x = ds.inputs.row(row);
      const double* mu = means.row(c);
      for (int d = 0; d < input_dim; ++d) x[d] = mu[d] + spread * normal01(rng);
      ds.labels[static_cast<std::size_t>(row)] = c;
    }
  }
  return ds;
}

Dataset load_cifar10(const std::string& path) {
  constexpr int kRecord = 1 + 3072;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_cifar10: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.empty()) throw FormatError("load_cifar10: " + path + " is empty");
  if (bytes.size() % kRecord != 0) {
    const std::size_t offset = (bytes.size() / kRecord) * kRecord;
    throw FormatError("load_cifar10: truncated record at byte offset " +
                      std::to_string(offset) + " in " + path + " (" +
                      std::to_string(bytes.size() - offset) + " trailing bytes)");
  }
  const int n = static_cast<int>(bytes.size() / kRecord);
  Dataset ds;
  ds.class_count = 10;
  ds.inputs = Matrix(n, 3072);
  ds.labels.resize(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    const std::size_t base = static_cast<std::size_t>(r) * kRecord;
    const unsigned char label = bytes[base];
    if (label > 9) {
      throw FormatError("load_cifar10: label " + std::to_string(int(label)) +
                        " out of range at byte offset " + std::to_string(base));
    }
    ds.labels[static_cast<std::size_t>(r)] = label;
    double* x = ds.inputs.row(r);
    for (int i = 0; i < 3072; ++i) {
      x[i] = static_cast<double>(bytes[base + 1 + static_cast<std::size_t>(i)]) / 255.0;
    }
  }
  return ds;
}

std::pair<Dataset, Dataset> split_labeled(const Dataset& pool, int n_labeled,
                                          std::uint64_t seed) {
  pool.validate();
  const int C = pool.class_count;
  if (n_labeled < C) throw ContractError("split_labeled: n_labeled must be >= class_count");
  if (n_labeled % C != 0) {
    throw ContractError("split_labeled: n_labeled must be divisible by class_count");
  }
  if (n_labeled >= pool.size()) {
    throw CapacityError("split_labeled: no samples would remain unlabeled");
  }
  const int quota = n_labeled / C;

  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(C));
  for (int i = 0; i < pool.size(); ++i) {
    by_class[static_cast<std::size_t>(pool.labels[static_cast<std::size_t>(i)])].push_back(i);
  }
  Rng rng = make_rng(derive_seed(seed, stream_tag("label-split")));
  std::vector<char> taken(static_cast<std::size_t>(pool.size()), 0);
  std::vector<int> labeled_rows;
  labeled_rows.reserve(static_cast<std::size_t>(n_labeled));
  for (int c = 0; c < C; ++c) {
    auto& rows = by_class[static_cast<std::size_t>(c)];
    if (static_cast<int>(rows.size()) < quota) {
      throw CapacityError("split_labeled: class " + std::to_string(c) + " has only " +
                          std::to_string(rows.size()) + " samples, need " +
                          std::to_string(quota));
    }
    shuffle_indices(rng, rows);
    for (int i = 0; i < quota; ++i) {
      labeled_rows.push_back(rows[static_cast<std::size_t>(i)]);
      taken[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])] = 1;
    }
  }

  std::vector<int> unlabeled_rows;
  unlabeled_rows.reserve(static_cast<std::size_t>(pool.size() - n_labeled));
  for (int i = 0; i < pool.size(); ++i) {
    if (!taken[static_cast<std::size_t>(i)]) unlabeled_rows.push_back(i);
  }

  auto subset = [&pool](const std::vector<int>& rows) {
    Dataset d;
    d.class_count = pool.class_count;
    d.inputs = pool.inputs.take_rows(rows);
    d.labels.reserve(rows.size());
    for (int r : rows) d.labels.push_back(pool.labels[static_cast<std::size_t>(r)]);
    return d;
  };
  return {subset(labeled_rows), subset(unlabeled_rows)};
}

}  // namespace fedmix
