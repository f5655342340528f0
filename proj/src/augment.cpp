#include "fedmix/augment.hpp"

#include <cmath>
#include <string>

#include "fedmix/errors.hpp"
#include "fedmix/rng.hpp"

namespace fedmix {

void AugmentSpec::validate(int input_dim) const {
  switch (kind) {
    case AugmentKind::identity:
      return;
    case AugmentKind::jitter:
      if (jitter_stddev < 0.0) throw ConfigError("augment: jitter_stddev must be >= 0");
      return;
    case AugmentKind::flip:
    case AugmentKind::shift:
      if (!shape.valid()) throw ConfigError("augment: flip/shift need an image shape");
      if (shape.dim() != input_dim) {
        throw ShapeError("augment: image shape covers " + std::to_string(shape.dim()) +
                         " values but inputs have " + std::to_string(input_dim));
      }
      if (kind == AugmentKind::shift && (shift_fraction < 0.0 || shift_fraction > 1.0)) {
        throw ConfigError("augment: shift_fraction must be in [0, 1]");
      }
      return;
  }
  throw ConfigError("augment: unknown kind");
}

namespace {
inline std::size_t plane_index(const ImageShape& s, int ch, int y, int x) {
  return (static_cast<std::size_t>(ch) * s.height + static_cast<std::size_t>(y)) * s.width +
         static_cast<std::size_t>(x);
}
}  // namespace

Matrix flip_image(const Matrix& inputs, const ImageShape& shape) {
  Matrix out(inputs.rows(), inputs.cols());
  for (int r = 0; r < inputs.rows(); ++r) {
    const double* src = inputs.row(r);
    double* dst = out.row(r);
    for (int ch = 0; ch < shape.channels; ++ch) {
      for (int y = 0; y < shape.height; ++y) {
        for (int x = 0; x < shape.width; ++x) {
          dst[plane_index(shape, ch, y, x)] =
              src[plane_index(shape, ch, y, shape.width - 1 - x)];
        }
      }
    }
  }
  return out;
}

Matrix shift_image(const Matrix& inputs, const ImageShape& shape, int dx, int dy) {
  Matrix out(inputs.rows(), inputs.cols());  // zero padded
  for (int r = 0; r < inputs.rows(); ++r) {
    const double* src = inputs.row(r);
    double* dst = out.row(r);
    for (int ch = 0; ch < shape.channels; ++ch) {
      for (int y = 0; y < shape.height; ++y) {
        const int sy = y - dy;
        if (sy < 0 || sy >= shape.height) continue;
        for (int x = 0; x < shape.width; ++x) {
          const int sx = x - dx;
          if (sx < 0 || sx >= shape.width) continue;
          dst[plane_index(shape, ch, y, x)] = src[plane_index(shape, ch, sy, sx)];
        }
      }
    }
  }
  return out;
}

Matrix apply_augment(const AugmentSpec& spec, const Matrix& inputs, std::uint64_t seed) {
  spec.validate(inputs.cols());
  switch (spec.kind) {
    case AugmentKind::identity:
      return inputs;
    case AugmentKind::flip:
      return flip_image(inputs, spec.shape);
    case AugmentKind::shift: {
      const int m = static_cast<int>(std::lround(spec.shift_fraction * spec.shape.width));
      if (m == 0) return inputs;
      Rng rng = make_rng(derive_seed(seed, stream_tag("shift")));
      Matrix out(inputs.rows(), inputs.cols());
      for (int r = 0; r < inputs.rows(); ++r) {
        static constexpr int kDir[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        const int d = uniform_index(rng, 4);
        Matrix row = shift_image(inputs.take_rows({r}), spec.shape, m * kDir[d][0],
                                 m * kDir[d][1]);
        for (int c = 0; c < inputs.cols(); ++c) out(r, c) = row(0, c);
      }
      return out;
    }
    case AugmentKind::jitter: {
      Rng rng = make_rng(derive_seed(seed, stream_tag("jitter")));
      Matrix out = inputs;
      for (double& v : out.data()) v += spec.jitter_stddev * normal01(rng);
      return out;
    }
  }
  throw ConfigError("augment: unknown kind");
}

std::vector<Matrix> augmentation_set(const AugmentFamily& family, const Matrix& inputs,
                                     int count, std::uint64_t seed) {
  if (count < 1) throw ContractError("augmentation_set: count must be >= 1");
  if (family.members.empty()) throw ContractError("augmentation_set: empty family");
  std::vector<Matrix> views;
  views.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const AugmentSpec& spec = family.members[static_cast<std::size_t>(i) % family.members.size()];
    views.push_back(apply_augment(spec, inputs, derive_seed(seed, stream_tag("view"), i)));
  }
  return views;
}

}  // namespace fedmix
