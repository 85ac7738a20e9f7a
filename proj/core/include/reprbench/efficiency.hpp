#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reprbench/quantizer.hpp"

namespace reprbench {

enum class bit_mode { exact_log2, integer_width };

struct bit_rate_spec {
  std::uint64_t vocab = 2;
  std::uint64_t codebooks = 1;
  double emission_rate = 50.0;  // codes per second
  bit_mode mode = bit_mode::exact_log2;
};

/// R = log2(V) * C * Rs; integer_width rounds log2(V) up to whole bits.
double bit_rate(const bit_rate_spec &spec);

/// Bits per code for a vocabulary, ceil(log2(V)).
std::uint32_t code_width_bits(std::uint64_t vocab);

struct continuous_stream {
  double bit_depth = 32;
  double dim = 1024;
  double frame_rate = 25;
};

/// One discrete row of the data-size table. Its code count is either
/// `codes_per_second * t_seconds` or `length_ratio` times the previous row's
/// code count (an empirically measured T'/T).
struct stage_spec {
  std::string name;
  double bits_per_code = 13;
  std::optional<double> codes_per_second;
  std::optional<double> length_ratio;
};

struct data_size_row {
  std::string stage;
  double codes = 0;  // frames for the continuous row
  double bits = 0;
  std::optional<double> reduction_ratio;  // bits / previous row's bits
};

/// Rows are the optional continuous stream followed by each stage, with
/// ratios taken row over row. `stages` must be non-empty.
std::vector<data_size_row> data_size_table(
    double t_seconds, const std::optional<continuous_stream> &continuous,
    const std::vector<stage_spec> &stages);

std::string format_data_size_table(const std::vector<data_size_row> &rows);

struct token_frequency_report {
  std::vector<std::uint64_t> counts;  // indexed by id, size == vocab
  std::uint64_t total = 0;
  std::vector<std::uint32_t> sorted_ids;  // count descending, id ascending
  std::vector<double> cumulative;         // per rank
  std::vector<std::uint32_t> under_trained;  // ascending ids
  double threshold = 0.95;
  /// Rank at which the cumulative fraction first reaches the threshold.
  std::size_t cutoff_rank = 0;

  std::size_t vocab() const noexcept { return counts.size(); }
  bool is_under_trained(std::uint32_t id) const;
};

/// Counts ids over the corpus (vocab 0 means max id + 1) and marks every id
/// ranked after the point where the cumulative fraction first reaches
/// `threshold` as under-trained.
token_frequency_report make_frequency_report(
    const std::vector<token_sequence> &corpus, double threshold,
    std::size_t vocab = 0);

/// rank, id, count, fraction, cumulative, under_trained
std::string format_frequency_tsv(const token_frequency_report &report);
nlohmann::json frequency_summary(const token_frequency_report &report);

struct prune_result {
  std::vector<token_sequence> corpus;
  /// (pruned id, replacement id), ascending by pruned id.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> remap;
};

/// Drops the floor(prune_fraction * k) least frequent codebook ids and
/// rewrites each of their occurrences to the retained id whose centroid is
/// nearest to the pruned centroid. Sequence lengths are unchanged.
prune_result prune_under_trained(const std::vector<token_sequence> &corpus,
                                 const codebook &cb, double prune_fraction);

}  // namespace reprbench
