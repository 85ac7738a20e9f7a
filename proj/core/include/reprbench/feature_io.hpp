#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "reprbench/matrix.hpp"

namespace reprbench {

/// Frames per second stored as an exact ratio, so both 25 Hz and 50 Hz
/// (and rates like 16000/320) are represented without rounding.
struct frame_rate {
  std::uint32_t numerator = 50;
  std::uint32_t denominator = 1;

  double hz() const noexcept {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  bool operator==(const frame_rate &) const = default;
};

/// T x D frame-level activations from one layer of one utterance.
struct feature_sequence {
  matrix_f frames;
  frame_rate rate;
  std::uint32_t layer_id = 0;
  std::string source_id;

  std::size_t num_frames() const noexcept { return frames.rows(); }
  std::size_t dim() const noexcept { return frames.cols(); }
  bool operator==(const feature_sequence &) const = default;
};

/// Throws validation_error when D == 0, the frame rate is not positive or a
/// value is NaN/Inf (the message names the first offending frame and column).
void validate(const feature_sequence &seq);

// SRF1 container: "SRF1", u32 version (1), u32 T, u32 D, u32 layer_id,
// u32 rate numerator, u32 rate denominator, then T*D little-endian binary32
// values in frame-major order.
inline constexpr std::size_t srf1_header_bytes = 28;
inline constexpr std::uint32_t srf1_version = 1;

std::vector<std::uint8_t> encode_features(const feature_sequence &seq);

/// Decodes an in-memory SRF1 image. `source_id` is attached to the result
/// since the container does not carry one.
feature_sequence decode_features(std::span<const std::uint8_t> bytes,
                                 std::string source_id = {});

/// Loads an SRF1 file; the source id defaults to the file stem.
feature_sequence load_features(const std::filesystem::path &path);
void store_features(const feature_sequence &seq,
                    const std::filesystem::path &path);

struct synth_spec {
  std::size_t frames = 0;
  std::size_t dim = 1;
  std::size_t modes = 1;
  double noise = 0.0;
  std::uint64_t seed = 0;
  /// 0 draws modes as a balanced shuffle (every mode present when
  /// frames >= modes); > 0 draws them from a Zipf law with this exponent.
  double zipf_exponent = 0.0;
  /// Mean length of constant-mode runs; 1 disables run structure.
  double mean_run_length = 1.0;
};

struct synth_result {
  feature_sequence sequence;
  matrix_f centers;                  // modes x dim
  std::vector<std::uint32_t> modes;  // generating mode per frame
};

/// Gaussian-mixture test data: frame = center[mode] + noise * N(0, I).
/// Centers are drawn uniformly from [-1, 1]^dim.
synth_result synth_structured_features(const synth_spec &spec);

feature_sequence synth_features(std::size_t t, std::size_t d,
                                std::size_t n_modes, double noise,
                                std::uint64_t seed);

struct manifest_entry {
  std::string source_id;
  std::filesystem::path path;
  std::optional<std::string> transcript;
  std::optional<std::string> label;

  bool operator==(const manifest_entry &) const = default;
};

struct manifest {
  std::vector<manifest_entry> entries;

  const manifest_entry *find(std::string_view source_id) const;
};

/// Reads a UTF-8 TSV manifest (source_id, path, transcript, label; trailing
/// fields may be omitted, empty fields read as absent). Relative feature
/// paths resolve against the manifest's directory.
manifest load_manifest(const std::filesystem::path &path);
manifest parse_manifest(std::string_view text,
                        const std::filesystem::path &base_dir = {});
void store_manifest(const manifest &m, const std::filesystem::path &path);

/// Loads every feature file in the manifest, with source ids taken from the
/// manifest rather than the file names.
std::vector<feature_sequence> load_all(const manifest &m);

}  // namespace reprbench
