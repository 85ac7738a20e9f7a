#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "reprbench/feature_io.hpp"
#include "reprbench/matrix.hpp"

namespace reprbench {

enum class token_stage { raw, dedup, bpe };

const char *to_string(token_stage stage) noexcept;
token_stage parse_token_stage(std::string_view text);

struct token_sequence {
  std::vector<std::uint32_t> ids;
  token_stage stage = token_stage::raw;
  std::string source_id;

  std::size_t size() const noexcept { return ids.size(); }
  bool operator==(const token_sequence &) const = default;
};

struct codebook {
  matrix_f centroids;  // k x d
  double trained_inertia = 0.0;
  std::map<std::string, std::string> meta;

  std::size_t k() const noexcept { return centroids.rows(); }
  std::size_t d() const noexcept { return centroids.cols(); }
  bool operator==(const codebook &) const = default;
};

struct kmeans_options {
  std::size_t k = 2000;
  std::size_t max_iters = 100;
  /// Stop once (previous - current) / previous inertia drops below this.
  double tol = 1e-6;
  std::uint64_t seed = 0;
  /// Train on every stride-th frame only.
  std::size_t frame_stride = 1;
};

struct kmeans_result {
  codebook model;
  /// Inertia after each assignment step; non-increasing.
  std::vector<double> inertia_trace;
  std::size_t iterations = 0;
  /// Number of empty clusters repaired by farthest-point reseeding.
  std::size_t reseeds = 0;
};

/// Lloyd's algorithm with k-means++ seeding over the rows of `frames`.
///
/// Each iteration assigns every frame to its nearest centroid (squared
/// Euclidean, lowest index on ties), repairs empty clusters by moving them
/// onto the frame farthest from its own centroid, records the inertia and
/// then recomputes the means. The returned centroids are the ones the last
/// recorded inertia was measured against, and `trained_inertia` is recomputed
/// on them after rounding to binary32.
kmeans_result train_kmeans(const matrix_f &frames, const kmeans_options &opts);

/// Nearest centroid for each frame, ties broken toward the lowest index.
token_sequence quantize(const feature_sequence &seq, const codebook &cb);
std::vector<std::uint32_t> assign(const matrix_f &frames, const matrix_f &centroids);

/// Sum over frames of the squared distance to the nearest centroid.
double inertia(const matrix_f &frames, const codebook &cb);

/// Stacks the rows of several sequences into one frame set.
matrix_f pool_frames(const std::vector<feature_sequence> &sequences);

// SCB1 container: "SCB1", u32 version (1), u32 k, u32 d, k*d binary32 LE
// centroids, u32 metadata byte count, then "key=value\n" lines. The trained
// inertia travels as the metadata key "trained_inertia".
std::vector<std::uint8_t> encode_codebook(const codebook &cb);
codebook decode_codebook(std::span<const std::uint8_t> bytes);
codebook load_codebook(const std::filesystem::path &path);
void store_codebook(const codebook &cb, const std::filesystem::path &path);

}  // namespace reprbench
