#include "reprbench/efficiency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "binary_io.hpp"

namespace reprbench {

double bit_rate(const bit_rate_spec &spec) {
  if (spec.vocab < 2 || spec.codebooks < 1 || !(spec.emission_rate > 0.0)) {
    throw argument_error("bit_rate: need V >= 2, C >= 1 and Rs > 0");
  }
  const double bits = spec.mode == bit_mode::exact_log2
                          ? std::log2(static_cast<double>(spec.vocab))
                          : static_cast<double>(code_width_bits(spec.vocab));
  return bits * static_cast<double>(spec.codebooks) * spec.emission_rate;
}

std::uint32_t code_width_bits(std::uint64_t vocab) {
  if (vocab < 2) {
    throw argument_error("code_width_bits: vocabulary must hold at least 2 ids");
  }
  std::uint32_t bits = 0;
  while (bits < 64 && (std::uint64_t{1} << bits) < vocab) ++bits;
  return bits;
}

std::vector<data_size_row> data_size_table(
    double t_seconds, const std::optional<continuous_stream> &continuous,
    const std::vector<stage_spec> &stages) {
  if (!(t_seconds > 0.0)) {
    throw argument_error("data_size_table: duration must be positive");
  }
  if (stages.empty()) {
    throw argument_error("data_size_table: no stages given");
  }
  std::vector<data_size_row> rows;
  if (continuous) {
    const double frames = continuous->frame_rate * t_seconds;
    rows.push_back({"continuous", frames,
                    continuous->bit_depth * continuous->dim * frames, std::nullopt});
  }
  const std::size_t first_code_row = rows.size();
  for (const auto &s : stages) {
    if (s.codes_per_second.has_value() == s.length_ratio.has_value()) {
      throw argument_error("data_size_table: stage '" + s.name +
                           "' needs exactly one of a code rate or a length ratio");
    }
    data_size_row row;
    row.stage = s.name;
    if (s.codes_per_second) {
      row.codes = *s.codes_per_second * t_seconds;
    } else {
      if (rows.size() == first_code_row) {
        throw argument_error("data_size_table: stage '" + s.name +
                             "' has a length ratio but no preceding code stage");
      }
      row.codes = rows.back().codes * *s.length_ratio;
    }
    row.bits = s.bits_per_code * row.codes;
    if (!rows.empty() && rows.back().bits > 0.0) {
      row.reduction_ratio = row.bits / rows.back().bits;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_data_size_table(const std::vector<data_size_row> &rows) {
  std::string out = "stage\tcodes\tbits\treduction_ratio\n";
  for (const auto &r : rows) {
    out += r.stage + "\t" + detail::format_double(r.codes) + "\t" +
           detail::format_double(r.bits) + "\t" +
           (r.reduction_ratio ? detail::format_double(*r.reduction_ratio) : "") +
           "\n";
  }
  return out;
}

bool token_frequency_report::is_under_trained(std::uint32_t id) const {
  return std::binary_search(under_trained.begin(), under_trained.end(), id);
}

token_frequency_report make_frequency_report(
    const std::vector<token_sequence> &corpus, double threshold,
    std::size_t vocab) {
  if (corpus.empty()) {
    throw argument_error("token frequency report: empty corpus");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw argument_error("token frequency report: threshold must lie in (0, 1)");
  }
  std::size_t max_id_plus_one = 0;
  for (const auto &t : corpus) {
    for (const auto id : t.ids) {
      max_id_plus_one = std::max<std::size_t>(max_id_plus_one, id + std::size_t{1});
    }
  }
  if (vocab == 0) {
    vocab = max_id_plus_one;
  } else if (max_id_plus_one > vocab) {
    throw validation_error("token frequency report: id " +
                           std::to_string(max_id_plus_one - 1) +
                           " exceeds vocabulary size " + std::to_string(vocab));
  }

  token_frequency_report r;
  r.threshold = threshold;
  r.counts.assign(vocab, 0);
  for (const auto &t : corpus) {
    for (const auto id : t.ids) ++r.counts[id];
  }
  r.total = std::accumulate(r.counts.begin(), r.counts.end(), std::uint64_t{0});
  if (r.total == 0) {
    throw argument_error("token frequency report: corpus holds no tokens");
  }

  r.sorted_ids.resize(vocab);
  std::iota(r.sorted_ids.begin(), r.sorted_ids.end(), 0u);
  std::stable_sort(r.sorted_ids.begin(), r.sorted_ids.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     return r.counts[a] > r.counts[b];
                   });
  r.cumulative.resize(vocab);
  std::uint64_t running = 0;
  r.cutoff_rank = vocab;
  for (std::size_t rank = 0; rank < vocab; ++rank) {
    running += r.counts[r.sorted_ids[rank]];
    r.cumulative[rank] = static_cast<double>(running) / static_cast<double>(r.total);
    if (r.cutoff_rank == vocab && r.cumulative[rank] >= threshold) {
      r.cutoff_rank = rank;
    }
  }
  for (std::size_t rank = r.cutoff_rank + 1; rank < vocab; ++rank) {
    r.under_trained.push_back(r.sorted_ids[rank]);
  }
  std::sort(r.under_trained.begin(), r.under_trained.end());
  return r;
}

std::string format_frequency_tsv(const token_frequency_report &report) {
  std::string out = "rank\tid\tcount\tfraction\tcumulative\tunder_trained\n";
  for (std::size_t rank = 0; rank < report.vocab(); ++rank) {
    const auto id = report.sorted_ids[rank];
    out += std::to_string(rank + 1) + "\t" + std::to_string(id) + "\t" +
           std::to_string(report.counts[id]) + "\t" +
           detail::format_double(static_cast<double>(report.counts[id]) /
                                 static_cast<double>(report.total)) +
           "\t" + detail::format_double(report.cumulative[rank]) + "\t" +
           (rank > report.cutoff_rank ? "1" : "0") + "\n";
  }
  return out;
}

nlohmann::json frequency_summary(const token_frequency_report &report) {
  std::uint64_t tail = 0;
  std::size_t used = 0;
  for (const auto id : report.under_trained) tail += report.counts[id];
  for (const auto c : report.counts) used += c > 0 ? 1 : 0;
  nlohmann::json j;
  j["vocab"] = report.vocab();
  j["total"] = report.total;
  j["used_ids"] = used;
  j["threshold"] = report.threshold;
  j["cutoff_rank"] = report.cutoff_rank;
  j["under_trained_count"] = report.under_trained.size();
  j["under_trained_fraction"] =
      static_cast<double>(report.under_trained.size()) /
      static_cast<double>(report.vocab());
  j["under_trained_mass"] =
      static_cast<double>(tail) / static_cast<double>(report.total);
  return j;
}

prune_result prune_under_trained(const std::vector<token_sequence> &corpus,
                                 const codebook &cb, double prune_fraction) {
  if (!(prune_fraction >= 0.0 && prune_fraction < 1.0)) {
    throw argument_error("prune: fraction must lie in [0, 1)");
  }
  for (const auto &t : corpus) {
    if (t.stage != token_stage::raw) {
      throw state_error("prune: sequence '" + t.source_id +
                        "' is not at the raw stage; pruning precedes dedup/BPE");
    }
  }
  const std::size_t k = cb.k();
  const auto n_prune = static_cast<std::size_t>(
      std::floor(prune_fraction * static_cast<double>(k)));
  if (n_prune >= k) {
    throw argument_error("prune: fraction would remove every codebook id");
  }
  const auto report = make_frequency_report(corpus, 0.5, k);

  std::vector<bool> pruned(k, false);
  for (std::size_t rank = k - n_prune; rank < k; ++rank) {
    pruned[report.sorted_ids[rank]] = true;
  }

  prune_result result;
  std::vector<std::uint32_t> target(k);
  std::iota(target.begin(), target.end(), 0u);
  for (std::uint32_t id = 0; id < k; ++id) {
    if (!pruned[id]) continue;
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_id = 0;
    for (std::uint32_t c = 0; c < k; ++c) {
      if (pruned[c]) continue;
      const double dist = squared_distance(cb.centroids.row(id), cb.centroids.row(c));
      if (dist < best) {
        best = dist;
        best_id = c;
      }
    }
    target[id] = best_id;
    result.remap.emplace_back(id, best_id);
  }
  result.corpus = corpus;
  for (auto &t : result.corpus) {
    for (auto &id : t.ids) id = target[id];
  }
  return result;
}

}  // namespace reprbench
