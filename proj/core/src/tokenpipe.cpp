#include "reprbench/tokenpipe.hpp"

#include <algorithm>
#include <queue>
#include <unordered_set>

#include "binary_io.hpp"

namespace reprbench {

namespace {

constexpr std::uint64_t pair_key(std::uint32_t left, std::uint32_t right) {
  return (static_cast<std::uint64_t>(left) << 32) | right;
}
constexpr std::uint32_t key_left(std::uint64_t key) {
  return static_cast<std::uint32_t>(key >> 32);
}
constexpr std::uint32_t key_right(std::uint64_t key) {
  return static_cast<std::uint32_t>(key);
}

void require_stage(const token_sequence &t, token_stage expected, const char *op) {
  if (t.stage != expected) {
    throw state_error(std::string(op) + ": sequence '" + t.source_id +
                      "' is at stage " + to_string(t.stage) + ", expected " +
                      to_string(expected));
  }
}

// Symbols of the whole corpus in one doubly linked list; links never cross
// sequence boundaries.
struct symbol_list {
  std::vector<std::uint32_t> value;
  std::vector<std::int64_t> prev;
  std::vector<std::int64_t> next;
  std::vector<bool> alive;
};

struct heap_entry {
  std::uint64_t count;
  std::uint64_t key;
  // Max-heap on count, then the smaller (left, right) pair wins.
  bool operator<(const heap_entry &o) const {
    if (count != o.count) return count < o.count;
    return key > o.key;
  }
};

}  // namespace

std::vector<std::uint32_t> collapse_runs(std::span<const std::uint32_t> ids) {
  std::vector<std::uint32_t> out;
  out.reserve(ids.size());
  for (const auto id : ids) {
    if (out.empty() || out.back() != id) out.push_back(id);
  }
  return out;
}

token_sequence deduplicate(const token_sequence &tokens) {
  require_stage(tokens, token_stage::raw, "deduplicate");
  return {collapse_runs(tokens.ids), token_stage::dedup, tokens.source_id};
}

bpe_model train_bpe(const std::vector<token_sequence> &corpus,
                    std::uint32_t base_vocab, std::uint32_t target_vocab) {
  if (corpus.empty()) {
    throw argument_error("train_bpe: empty corpus");
  }
  if (target_vocab <= base_vocab) {
    throw argument_error("train_bpe: target vocabulary " +
                         std::to_string(target_vocab) +
                         " must exceed the base vocabulary " +
                         std::to_string(base_vocab));
  }

  symbol_list sym;
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> where;
  for (const auto &seq : corpus) {
    require_stage(seq, token_stage::dedup, "train_bpe");
    const std::size_t start = sym.value.size();
    for (std::size_t i = 0; i < seq.ids.size(); ++i) {
      if (seq.ids[i] >= base_vocab) {
        throw validation_error("train_bpe: id " + std::to_string(seq.ids[i]) +
                               " in '" + seq.source_id +
                               "' is outside the base vocabulary");
      }
      const std::size_t pos = start + i;
      sym.value.push_back(seq.ids[i]);
      sym.prev.push_back(i == 0 ? -1 : static_cast<std::int64_t>(pos - 1));
      sym.next.push_back(i + 1 == seq.ids.size() ? -1
                                                 : static_cast<std::int64_t>(pos + 1));
      sym.alive.push_back(true);
      if (i > 0) {
        const auto key = pair_key(seq.ids[i - 1], seq.ids[i]);
        ++counts[key];
        where[key].push_back(pos - 1);
      }
    }
  }

  std::priority_queue<heap_entry> heap;
  for (const auto &[key, count] : counts) heap.push({count, key});

  bpe_model model;
  model.base_vocab = base_vocab;
  std::unordered_set<std::uint64_t> touched;

  auto add = [&](std::uint64_t key, std::size_t left_pos) {
    ++counts[key];
    where[key].push_back(left_pos);
    touched.insert(key);
  };
  auto remove = [&](std::uint64_t key) {
    auto it = counts.find(key);
    if (--it->second == 0) counts.erase(it);
    touched.insert(key);
  };

  while (model.vocab_size() < target_vocab) {
    std::uint64_t best = 0;
    std::uint64_t best_count = 0;
    while (!heap.empty()) {
      const auto top = heap.top();
      const auto it = counts.find(top.key);
      if (it == counts.end() || it->second != top.count) {
        heap.pop();
        continue;
      }
      best = top.key;
      best_count = top.count;
      break;
    }
    if (best_count < bpe_min_pair_frequency) {
      model.stopped_early = true;
      break;
    }

    const std::uint32_t left = key_left(best);
    const std::uint32_t right = key_right(best);
    const std::uint32_t id = model.vocab_size();
    model.merges.push_back({left, right, id, best_count});

    auto positions = std::move(where[best]);
    where.erase(best);
    std::sort(positions.begin(), positions.end());
    positions.erase(std::unique(positions.begin(), positions.end()), positions.end());

    touched.clear();
    for (const std::size_t p : positions) {
      if (!sym.alive[p] || sym.value[p] != left) continue;
      const auto q = sym.next[p];
      if (q < 0 || sym.value[static_cast<std::size_t>(q)] != right) continue;
      const auto pp = sym.prev[p];
      const auto nn = sym.next[static_cast<std::size_t>(q)];

      remove(best);
      if (pp >= 0) {
        const auto pv = sym.value[static_cast<std::size_t>(pp)];
        remove(pair_key(pv, left));
        add(pair_key(pv, id), static_cast<std::size_t>(pp));
      }
      if (nn >= 0) {
        const auto nv = sym.value[static_cast<std::size_t>(nn)];
        remove(pair_key(right, nv));
        add(pair_key(id, nv), p);
      }
      sym.value[p] = id;
      sym.alive[static_cast<std::size_t>(q)] = false;
      sym.next[p] = nn;
      if (nn >= 0) sym.prev[static_cast<std::size_t>(nn)] = static_cast<std::int64_t>(p);
    }
    for (const auto key : touched) {
      if (const auto it = counts.find(key); it != counts.end()) {
        heap.push({it->second, key});
      } else {
        where.erase(key);
      }
    }
  }
  return model;
}

bpe_codec::bpe_codec(const bpe_model &model) : model_(model) {
  rank_.reserve(model.merges.size());
  for (std::size_t r = 0; r < model.merges.size(); ++r) {
    const auto &m = model.merges[r];
    if (m.id != model.base_vocab + r || m.left >= m.id || m.right >= m.id) {
      throw validation_error("BPE model: merge " + std::to_string(r) +
                             " breaks id ordering");
    }
    rank_.emplace(pair_key(m.left, m.right), static_cast<std::uint32_t>(r));
  }
}

std::vector<std::uint32_t> bpe_codec::encode(std::span<const std::uint32_t> ids) const {
  for (const auto id : ids) {
    if (id >= model_.base_vocab) {
      throw validation_error("apply_bpe: id " + std::to_string(id) +
                             " is outside the base vocabulary of " +
                             std::to_string(model_.base_vocab));
    }
  }
  std::vector<std::uint32_t> seq(ids.begin(), ids.end());
  std::vector<std::uint32_t> scratch;
  scratch.reserve(seq.size());
  for (;;) {
    std::uint32_t best_rank = UINT32_MAX;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      const auto it = rank_.find(pair_key(seq[i], seq[i + 1]));
      if (it != rank_.end() && it->second < best_rank) best_rank = it->second;
    }
    if (best_rank == UINT32_MAX) break;
    const auto &m = model_.merges[best_rank];
    scratch.clear();
    for (std::size_t i = 0; i < seq.size();) {
      if (i + 1 < seq.size() && seq[i] == m.left && seq[i + 1] == m.right) {
        scratch.push_back(m.id);
        i += 2;
      } else {
        scratch.push_back(seq[i]);
        ++i;
      }
    }
    seq.swap(scratch);
  }
  return seq;
}

std::vector<std::uint32_t> bpe_codec::decode(std::span<const std::uint32_t> ids) const {
  std::vector<std::uint32_t> out;
  out.reserve(ids.size() * 2);
  std::vector<std::uint32_t> stack;
  for (const auto id : ids) {
    if (id >= model_.vocab_size()) {
      throw validation_error("decode_bpe: id " + std::to_string(id) +
                             " is outside the vocabulary of " +
                             std::to_string(model_.vocab_size()));
    }
    stack.push_back(id);
    while (!stack.empty()) {
      const auto top = stack.back();
      stack.pop_back();
      if (top < model_.base_vocab) {
        out.push_back(top);
      } else {
        const auto &m = model_.merges[top - model_.base_vocab];
        stack.push_back(m.right);
        stack.push_back(m.left);
      }
    }
  }
  return out;
}

std::vector<std::uint32_t> encode_ids(std::span<const std::uint32_t> ids,
                                      const bpe_model &model) {
  return bpe_codec(model).encode(ids);
}

std::vector<std::uint32_t> decode_ids(std::span<const std::uint32_t> ids,
                                      const bpe_model &model) {
  return bpe_codec(model).decode(ids);
}

token_sequence apply_bpe(const token_sequence &tokens, const bpe_model &model) {
  require_stage(tokens, token_stage::dedup, "apply_bpe");
  return {encode_ids(tokens.ids, model), token_stage::bpe, tokens.source_id};
}

token_sequence decode_bpe(const token_sequence &tokens, const bpe_model &model) {
  require_stage(tokens, token_stage::bpe, "decode_bpe");
  return {decode_ids(tokens.ids, model), token_stage::dedup, tokens.source_id};
}

double length_reduction_ratio(const token_sequence &before,
                              const token_sequence &after) {
  if (before.ids.empty()) {
    throw argument_error("length_reduction_ratio: '" + before.source_id +
                         "' is empty");
  }
  return static_cast<double>(after.size()) / static_cast<double>(before.size());
}

double length_reduction_ratio(const std::vector<token_sequence> &before,
                              const std::vector<token_sequence> &after) {
  std::size_t b = 0;
  std::size_t a = 0;
  for (const auto &t : before) b += t.size();
  for (const auto &t : after) a += t.size();
  if (b == 0) {
    throw argument_error("length_reduction_ratio: empty corpus");
  }
  return static_cast<double>(a) / static_cast<double>(b);
}

std::string format_bpe(const bpe_model &model) {
  std::string out = "BPE1 " + std::to_string(model.base_vocab) + "\n";
  for (const auto &m : model.merges) {
    out += std::to_string(m.left) + " " + std::to_string(m.right) + " " +
           std::to_string(m.id) + "\n";
  }
  return out;
}

bpe_model parse_bpe(std::string_view text) {
  auto lines = detail::split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || !lines[0].starts_with("BPE1 ")) {
    throw format_error("BPE model: missing 'BPE1 <base_vocab>' header");
  }
  bpe_model model;
  const auto base = detail::parse_u64(lines[0].substr(5));
  if (base > UINT32_MAX) throw format_error("BPE model: base vocabulary too large");
  model.base_vocab = static_cast<std::uint32_t>(base);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = detail::split(lines[i], ' ');
    if (f.size() != 3) {
      throw format_error("BPE model line " + std::to_string(i + 1) +
                         ": expected 'left right new'");
    }
    bpe_merge m;
    m.left = static_cast<std::uint32_t>(detail::parse_u64(f[0]));
    m.right = static_cast<std::uint32_t>(detail::parse_u64(f[1]));
    m.id = static_cast<std::uint32_t>(detail::parse_u64(f[2]));
    model.merges.push_back(m);
  }
  bpe_codec check(model);  // validates id ordering
  return model;
}

bpe_model load_bpe(const std::filesystem::path &path) {
  const auto text = detail::read_text_file(path);
  try {
    return parse_bpe(text);
  } catch (const error &e) {
    throw_error(e.kind(), path.string() + ": " + e.what());
  }
}

void store_bpe(const bpe_model &model, const std::filesystem::path &path) {
  detail::write_text_file(path, format_bpe(model));
}

std::string format_token_corpus(const std::vector<token_sequence> &corpus) {
  std::string out;
  for (const auto &t : corpus) {
    out += t.source_id;
    out += '\t';
    for (std::size_t i = 0; i < t.ids.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(t.ids[i]);
    }
    out += '\t';
    out += to_string(t.stage);
    out += '\n';
  }
  return out;
}

std::vector<token_sequence> parse_token_corpus(std::string_view text) {
  std::vector<token_sequence> corpus;
  std::size_t line_no = 0;
  for (auto line : detail::split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto f = detail::split(line, '\t');
    if (f.size() != 3) {
      throw format_error("token corpus line " + std::to_string(line_no) +
                         ": expected source_id, ids and stage");
    }
    token_sequence t;
    t.source_id = std::string(f[0]);
    t.stage = parse_token_stage(f[2]);
    if (!f[1].empty()) {
      for (const auto id : detail::split(f[1], ' ')) {
        const auto v = detail::parse_u64(id);
        if (v > UINT32_MAX) throw format_error("token id out of range");
        t.ids.push_back(static_cast<std::uint32_t>(v));
      }
    }
    corpus.push_back(std::move(t));
  }
  return corpus;
}

std::vector<token_sequence> load_token_corpus(const std::filesystem::path &path) {
  const auto text = detail::read_text_file(path);
  try {
    return parse_token_corpus(text);
  } catch (const error &e) {
    throw_error(e.kind(), path.string() + ": " + e.what());
  }
}

void store_token_corpus(const std::vector<token_sequence> &corpus,
                        const std::filesystem::path &path) {
  detail::write_text_file(path, format_token_corpus(corpus));
}

}  // namespace reprbench
