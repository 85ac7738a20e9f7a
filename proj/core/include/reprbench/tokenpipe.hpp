#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "reprbench/quantizer.hpp"

namespace reprbench {

/// Collapses runs of equal adjacent ids. Idempotent.
std::vector<std::uint32_t> collapse_runs(std::span<const std::uint32_t> ids);

/// raw -> dedup. Throws state_error for any other input stage.
token_sequence deduplicate(const token_sequence &tokens);

struct bpe_merge {
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t id = 0;
  /// Corpus frequency of the pair when the merge was chosen (0 when loaded
  /// from a file, which does not store it).
  std::uint64_t frequency = 0;

  bool operator==(const bpe_merge &o) const {
    return left == o.left && right == o.right && id == o.id;
  }
};

struct bpe_model {
  std::uint32_t base_vocab = 0;
  std::vector<bpe_merge> merges;
  /// Set when training stopped before reaching the requested vocabulary
  /// because no pair occurred at least twice.
  bool stopped_early = false;

  std::uint32_t vocab_size() const noexcept {
    return base_vocab + static_cast<std::uint32_t>(merges.size());
  }
  bool operator==(const bpe_model &o) const {
    return base_vocab == o.base_vocab && merges == o.merges;
  }
};

inline constexpr std::uint64_t bpe_min_pair_frequency = 2;

/// Greedy BPE over dedup-stage sequences. Each step merges the most frequent
/// adjacent pair (ties: lower left id, then lower right id), replacing its
/// occurrences left to right without overlap; pairs never span sequences.
/// Stops at `target_vocab` or when no pair occurs twice.
bpe_model train_bpe(const std::vector<token_sequence> &corpus,
                    std::uint32_t base_vocab, std::uint32_t target_vocab);

/// Precomputed lookup tables for applying and inverting a model.
class bpe_codec {
 public:
  explicit bpe_codec(const bpe_model &model);

  /// Applies merges in model order, each exhaustively left to right. Only
  /// merges whose pair is present are visited: a merge can only create pairs
  /// whose rank is higher than its own, so visiting the lowest-ranked present
  /// pair each round is equivalent to the full ordered pass.
  std::vector<std::uint32_t> encode(std::span<const std::uint32_t> ids) const;
  std::vector<std::uint32_t> decode(std::span<const std::uint32_t> ids) const;

  const bpe_model &model() const noexcept { return model_; }

 private:
  bpe_model model_;
  std::unordered_map<std::uint64_t, std::uint32_t> rank_;
};

std::vector<std::uint32_t> encode_ids(std::span<const std::uint32_t> ids,
                                      const bpe_model &model);
std::vector<std::uint32_t> decode_ids(std::span<const std::uint32_t> ids,
                                      const bpe_model &model);

token_sequence apply_bpe(const token_sequence &tokens, const bpe_model &model);
token_sequence decode_bpe(const token_sequence &tokens, const bpe_model &model);

/// |after| / |before|, the T'/T compression ratio.
double length_reduction_ratio(const token_sequence &before,
                              const token_sequence &after);
double length_reduction_ratio(const std::vector<token_sequence> &before,
                              const std::vector<token_sequence> &after);

/// Text form: "BPE1 <base_vocab>" then one "left right new" line per merge.
std::string format_bpe(const bpe_model &model);
bpe_model parse_bpe(std::string_view text);
bpe_model load_bpe(const std::filesystem::path &path);
void store_bpe(const bpe_model &model, const std::filesystem::path &path);

/// Token corpus TSV: source_id, space separated ids, stage.
std::string format_token_corpus(const std::vector<token_sequence> &corpus);
std::vector<token_sequence> parse_token_corpus(std::string_view text);
std::vector<token_sequence> load_token_corpus(const std::filesystem::path &path);
void store_token_corpus(const std::vector<token_sequence> &corpus,
                        const std::filesystem::path &path);

}  // namespace reprbench
