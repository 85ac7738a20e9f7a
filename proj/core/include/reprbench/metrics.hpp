#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reprbench/error.hpp"

namespace reprbench {

struct edit_stats {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t hits = 0;
  std::size_t ref_len = 0;

  std::size_t errors() const noexcept {
    return substitutions + insertions + deletions;
  }
  double rate() const;

  edit_stats &operator+=(const edit_stats &o) noexcept {
    substitutions += o.substitutions;
    insertions += o.insertions;
    deletions += o.deletions;
    hits += o.hits;
    ref_len += o.ref_len;
    return *this;
  }
  bool operator==(const edit_stats &) const = default;
};

using word_seq = std::vector<std::string>;

/// Unit-cost Levenshtein alignment. The backtrace prefers the diagonal
/// (match/substitution), then insertion, then deletion.
edit_stats align(std::span<const std::string> ref,
                 std::span<const std::string> hyp);

edit_stats corpus_edit_stats(const std::vector<word_seq> &refs,
                             const std::vector<word_seq> &hyps);

/// (S + D + I) / N over the corpus.
double wer(const std::vector<word_seq> &refs, const std::vector<word_seq> &hyps);
double per(const std::vector<word_seq> &refs, const std::vector<word_seq> &hyps);

double accuracy(const std::vector<std::string> &refs,
                const std::vector<std::string> &hyps);

/// Corpus BLEU in [0, 100]: clipped n-gram precisions up to max_n, geometric
/// mean, brevity penalty exp(1 - r/c) when c < r. Zero precisions for n > 1
/// are add-one smoothed; a zero unigram precision gives 0.
double bleu(const std::vector<word_seq> &refs, const std::vector<word_seq> &hyps,
            std::size_t max_n = 4);

/// Lowercases ASCII, strips punctuation except apostrophes and collapses
/// whitespace.
std::string normalize_text(std::string_view text);

word_seq split_words(std::string_view text);
/// One entry per UTF-8 code point, whitespace dropped.
word_seq split_chars(std::string_view text);

}  // namespace reprbench
