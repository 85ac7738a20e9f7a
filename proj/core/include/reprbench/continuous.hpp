#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "reprbench/feature_io.hpp"
#include "reprbench/matrix.hpp"

namespace reprbench {

/// N x (factor * D) frames, each row the concatenation of `factor`
/// consecutive source frames.
struct stacked_sequence {
  matrix_f frames;
  std::size_t stack_factor = 1;
  std::size_t source_frames = 0;
};

/// Frame stacking. N = floor(T / factor); the trailing T mod factor frames
/// are dropped.
stacked_sequence downsample_stack(const feature_sequence &seq,
                                  std::size_t factor);

/// Single affine layer mapping stacked frames to a target hidden size.
struct linear_adapter {
  matrix_d weight;  // in x hidden
  std::vector<double> bias;

  std::size_t input_dim() const noexcept { return weight.rows(); }
  std::size_t hidden_dim() const noexcept { return weight.cols(); }
};

/// Weights and bias drawn uniformly from +-1/sqrt(input_dim).
linear_adapter init_adapter(std::size_t input_dim, std::size_t hidden_dim,
                            std::uint64_t seed);

/// Row n of the result is frames[n] * weight + bias.
matrix_d project(const matrix_f &frames, const linear_adapter &adapter);
matrix_d project(const stacked_sequence &seq, const linear_adapter &adapter);

/// Stored as two SRF1 files, `<prefix>.weight.srf` (in x hidden) and
/// `<prefix>.bias.srf` (1 x hidden). Values are narrowed to binary32.
void store_adapter(const linear_adapter &adapter,
                   const std::filesystem::path &prefix);
linear_adapter load_adapter(const std::filesystem::path &prefix);

}  // namespace reprbench
