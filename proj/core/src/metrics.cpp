#include "reprbench/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace reprbench {

double edit_stats::rate() const {
  if (ref_len == 0) {
    throw argument_error("error rate: reference is empty");
  }
  return static_cast<double>(errors()) / static_cast<double>(ref_len);
}

edit_stats align(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  // cost[i][j]: distance between ref[0, i) and hyp[0, j)
  std::vector<std::size_t> cost((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t & {
    return cost[i * (m + 1) + j];
  };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i, j - 1) + 1, at(i - 1, j) + 1});
    }
  }

  edit_stats s;
  s.ref_len = n;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        ++(same ? s.hits : s.substitutions);
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && at(i, j) == at(i, j - 1) + 1) {
      ++s.insertions;
      --j;
    } else {
      ++s.deletions;
      --i;
    }
  }
  return s;
}

namespace {

template <typename T>
void check_pairs(const std::vector<T> &refs, const std::vector<T> &hyps,
                 const char *what) {
  if (refs.size() != hyps.size()) {
    throw argument_error(std::string(what) + ": " + std::to_string(refs.size()) +
                         " references but " + std::to_string(hyps.size()) +
                         " hypotheses");
  }
  if (refs.empty()) {
    throw argument_error(std::string(what) + ": empty corpus");
  }
}

std::string ngram_key(const word_seq &words, std::size_t start, std::size_t n) {
  std::string key;
  for (std::size_t i = start; i < start + n; ++i) {
    key += words[i];
    key += '\x1f';
  }
  return key;
}

std::map<std::string, std::size_t> ngram_counts(const word_seq &words, std::size_t n) {
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i + n <= words.size(); ++i) ++counts[ngram_key(words, i, n)];
  return counts;
}

}  // namespace

edit_stats corpus_edit_stats(const std::vector<word_seq> &refs,
                             const std::vector<word_seq> &hyps) {
  check_pairs(refs, hyps, "error rate");
  edit_stats total;
  for (std::size_t i = 0; i < refs.size(); ++i) total += align(refs[i], hyps[i]);
  return total;
}

double wer(const std::vector<word_seq> &refs, const std::vector<word_seq> &hyps) {
  return corpus_edit_stats(refs, hyps).rate();
}

double per(const std::vector<word_seq> &refs, const std::vector<word_seq> &hyps) {
  return corpus_edit_stats(refs, hyps).rate();
}

double accuracy(const std::vector<std::string> &refs,
                const std::vector<std::string> &hyps) {
  check_pairs(refs, hyps, "accuracy");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) hits += refs[i] == hyps[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(refs.size());
}

double bleu(const std::vector<word_seq> &refs, const std::vector<word_seq> &hyps,
            std::size_t max_n) {
  check_pairs(refs, hyps, "bleu");
  if (max_n == 0) {
    throw argument_error("bleu: max_n must be at least 1");
  }
  std::vector<std::size_t> matched(max_n, 0);
  std::vector<std::size_t> total(max_n, 0);
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
  for (std::size_t s = 0; s < refs.size(); ++s) {
    hyp_len += hyps[s].size();
    ref_len += refs[s].size();
    for (std::size_t n = 1; n <= max_n; ++n) {
      const auto h = ngram_counts(hyps[s], n);
      const auto r = ngram_counts(refs[s], n);
      for (const auto &[gram, count] : h) {
        total[n - 1] += count;
        if (const auto it = r.find(gram); it != r.end()) {
          matched[n - 1] += std::min(count, it->second);
        }
      }
    }
  }
  if (hyp_len == 0 || matched[0] == 0) return 0.0;

  double log_precision = 0.0;
  for (std::size_t n = 0; n < max_n; ++n) {
    const double p = n > 0 && matched[n] == 0
                         ? 1.0 / static_cast<double>(total[n] + 1)
                         : static_cast<double>(matched[n]) / static_cast<double>(total[n]);
    log_precision += std::log(p);
  }
  const double c = static_cast<double>(hyp_len);
  const double r = static_cast<double>(ref_len);
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return 100.0 * bp * std::exp(log_precision / static_cast<double>(max_n));
}

std::string normalize_text(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (const char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    const bool space = u < 0x80 && (std::isspace(u) || (std::ispunct(u) && ch != '\''));
    if (space) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += u < 0x80 ? static_cast<char>(std::tolower(u)) : ch;
  }
  return out;
}

word_seq split_words(std::string_view text) {
  word_seq words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

word_seq split_chars(std::string_view text) {
  word_seq chars;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    len = std::min(len, text.size() - i);
    if (!(len == 1 && std::isspace(lead))) chars.emplace_back(text.substr(i, len));
    i += len;
  }
  return chars;
}

}  // namespace reprbench
