#pragma once

#include <cstdint>
#include <vector>

#include "fedmix/matrix.hpp"

namespace fedmix {

enum class AugmentKind { identity, flip, shift, jitter };

// Channel-planar image geometry (CIFAR layout: plane per channel, row-major
// within a plane). Only needed by the geometric transforms.
struct ImageShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  bool valid() const { return height > 0 && width > 0 && channels > 0; }
  int dim() const { return height * width * channels; }
};

struct AugmentSpec {
  AugmentKind kind = AugmentKind::identity;
  ImageShape shape;              // required for flip/shift
  double shift_fraction = 0.1;   // of width, rounded to whole pixels
  double jitter_stddev = 0.05;   // absolute noise stddev

  void validate(int input_dim) const;
};

// Applies one transform to every row. Stochastic transforms (shift direction,
// jitter noise) draw from the seed only; equal seeds give equal outputs.
Matrix apply_augment(const AugmentSpec& spec, const Matrix& inputs, std::uint64_t seed);

// Exposed for direct testing.
Matrix flip_image(const Matrix& inputs, const ImageShape& shape);
Matrix shift_image(const Matrix& inputs, const ImageShape& shape, int dx, int dy);

// The pool of transforms pseudo-labeling and consistency draw from.
struct AugmentFamily {
  std::vector<AugmentSpec> members;
};

// `count` stochastic views of the batch: view i uses members[i % size] with
// its own derived seed.
std::vector<Matrix> augmentation_set(const AugmentFamily& family, const Matrix& inputs,
                                     int count, std::uint64_t seed);

}  // namespace fedmix
