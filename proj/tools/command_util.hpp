#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "reprbench/error.hpp"
#include "reprbench/feature_io.hpp"
#include "reprbench/probe.hpp"
#include "reprbench/quantizer.hpp"
#include "reprbench/tokenpipe.hpp"

namespace reprbench::cli {

inline std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

inline void write_text(const std::filesystem::path &path, const std::string &text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw io_error("write failed: " + path.string());
}

inline void write_json(const std::filesystem::path &path, const nlohmann::json &j) {
  write_text(path, j.dump(2) + "\n");
}

/// Token corpus that must hold at least one token.
inline std::vector<token_sequence> load_nonempty_corpus(const std::filesystem::path &path) {
  auto corpus = load_token_corpus(path);
  std::size_t tokens = 0;
  for (const auto &t : corpus) tokens += t.size();
  if (tokens == 0) {
    throw argument_error("token corpus " + path.string() + " is empty");
  }
  return corpus;
}

inline std::size_t total_tokens(const std::vector<token_sequence> &corpus) {
  std::size_t n = 0;
  for (const auto &t : corpus) n += t.size();
  return n;
}

/// Mean over utterances of |final| / |raw|, skipping empty utterances.
inline double mean_ratio(const std::vector<std::size_t> &raw_lengths,
                         const std::vector<token_sequence> &final_corpus) {
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < raw_lengths.size(); ++i) {
    if (raw_lengths[i] == 0) continue;
    sum += static_cast<double>(final_corpus[i].size()) / static_cast<double>(raw_lengths[i]);
    ++used;
  }
  if (used == 0) throw argument_error("no non-empty utterances");
  return sum / static_cast<double>(used);
}

inline std::vector<std::string> manifest_labels(const manifest &m) {
  std::vector<std::string> labels;
  for (const auto &e : m.entries) {
    if (!e.label) {
      throw validation_error("manifest entry '" + e.source_id + "' has no label");
    }
    labels.push_back(*e.label);
  }
  return labels;
}

inline std::vector<std::string> manifest_ids(const manifest &m) {
  std::vector<std::string> ids;
  for (const auto &e : m.entries) ids.push_back(e.source_id);
  return ids;
}

probe_config probe_settings(const settings &s, std::uint64_t seed);

kmeans_options kmeans_settings(const settings &s, std::size_t k);
void stamp_codebook(kmeans_result &result, const kmeans_options &opts,
                    const std::vector<feature_sequence> &seqs,
                    const std::filesystem::path &manifest_path);

std::vector<matrix_f> stacked_features(const std::vector<feature_sequence> &seqs,
                                       std::size_t factor);

nlohmann::json stages_json(const settings &s);

}  // namespace reprbench::cli
