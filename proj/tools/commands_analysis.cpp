#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "command_util.hpp"
#include "commands.hpp"
#include "reprbench/efficiency.hpp"
#include "reprbench/metrics.hpp"

namespace reprbench::cli {

namespace {

struct keyed_text {
  std::vector<std::string> ids;
  std::vector<std::string> texts;
};

// "source_id<TAB>text" per line; blank lines skipped.
keyed_text load_keyed(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  keyed_text out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw format_error(path.string() + ":" + std::to_string(lineno) +
                         ": expected source_id<TAB>text");
    }
    auto id = line.substr(0, tab);
    if (!seen.insert(id).second) {
      throw validation_error(path.string() + ":" + std::to_string(lineno) +
                             ": duplicate source_id '" + id + "'");
    }
    out.ids.push_back(std::move(id));
    out.texts.push_back(line.substr(tab + 1));
  }
  return out;
}

}  // namespace

int cmd_report(const settings &s, std::ostream &out) {
  const auto raw_path = s.required_path("raw");
  const auto raw = load_nonempty_corpus(raw_path);
  std::optional<std::vector<token_sequence>> dedup, bpe;
  if (const auto p = s.optional_path("dedup")) dedup = load_nonempty_corpus(*p);
  if (const auto p = s.optional_path("bpe-tokens")) bpe = load_nonempty_corpus(*p);

  const double raw_count = static_cast<double>(total_tokens(raw));
  std::vector<stage_spec> stages;
  stages.push_back({"raw", s.real("code-bits", 13), s.real("code-rate", 50), std::nullopt});
  double previous = raw_count;
  if (dedup) {
    const double n = static_cast<double>(total_tokens(*dedup));
    stages.push_back({"dedup", s.real("code-bits", 13), std::nullopt, n / previous});
    previous = n;
  }
  if (bpe) {
    const double n = static_cast<double>(total_tokens(*bpe));
    stages.push_back({"bpe", s.real("bpe-bits", s.real("code-bits", 13)), std::nullopt,
                      n / previous});
  }
  const continuous_stream cont{s.real("bit-depth", 32), s.real("dim", 1024),
                               s.real("frame-rate", 25)};
  const auto rows = data_size_table(s.real("seconds", 1), cont, stages);

  const auto &last = bpe ? *bpe : dedup ? *dedup : raw;
  const auto report = make_frequency_report(last, s.real("threshold", 0.95),
                                            s.count("vocab", 0));

  const auto dir = s.required_path("out-dir");
  write_text(dir / "data_size.tsv", format_data_size_table(rows));
  write_text(dir / "frequency.tsv", format_frequency_tsv(report));

  nlohmann::json j;
  j["token_counts"]["raw"] = total_tokens(raw);
  if (dedup) j["token_counts"]["dedup"] = total_tokens(*dedup);
  if (bpe) j["token_counts"]["bpe"] = total_tokens(*bpe);
  j["data_size"] = nlohmann::json::array();
  for (const auto &r : rows) {
    nlohmann::json row{{"stage", r.stage}, {"codes", r.codes}, {"bits", r.bits}};
    if (r.reduction_ratio) row["reduction_ratio"] = *r.reduction_ratio;
    j["data_size"].push_back(row);
  }
  j["total_ratio"] = rows.back().bits / rows.front().bits;
  j["frequency"] = frequency_summary(report);
  write_json(dir / "summary.json", j);

  out << format_data_size_table(rows);
  out << "under_trained\t" << report.under_trained.size() << '\n';
  return exit_ok;
}

int cmd_freq(const settings &s, std::ostream &out) {
  const auto corpus = load_nonempty_corpus(s.required_path("tokens"));
  const auto report = make_frequency_report(corpus, s.real("threshold", 0.95),
                                            s.count("vocab", 0));
  write_text(s.required_path("out"), format_frequency_tsv(report));
  if (const auto summary = s.optional_path("summary")) {
    write_json(*summary, frequency_summary(report));
  }
  out << "vocab\t" << report.vocab() << '\n'
      << "total\t" << report.total << '\n'
      << "cutoff_rank\t" << report.cutoff_rank << '\n'
      << "under_trained\t" << report.under_trained.size() << '\n';
  return exit_ok;
}

int cmd_prune(const settings &s, std::ostream &out) {
  const auto corpus = load_nonempty_corpus(s.required_path("tokens"));
  const auto cb = load_codebook(s.required_path("codebook"));
  const auto result = prune_under_trained(corpus, cb, s.real("fraction", 0.1));
  store_token_corpus(result.corpus, s.required_path("out"));
  if (const auto remap = s.optional_path("remap")) {
    std::ostringstream tsv;
    tsv << "pruned\treplacement\n";
    for (const auto &[from, to] : result.remap) tsv << from << '\t' << to << '\n';
    write_text(*remap, tsv.str());
  }
  out << "pruned\t" << result.remap.size() << '\n';
  return exit_ok;
}

int cmd_metrics(const settings &s, std::ostream &out) {
  const auto task = s.text("task", "wer");
  if (task != "wer" && task != "per" && task != "acc" && task != "bleu") {
    throw config_error("metrics: unknown task '" + task + "' (wer, per, acc, bleu)");
  }
  const auto ref_path = s.required_path("ref");
  const auto hyp_path = s.required_path("hyp");
  const auto ref = load_keyed(ref_path);
  const auto hyp = load_keyed(hyp_path);
  if (ref.ids.size() != hyp.ids.size()) {
    throw validation_error("metrics: " + ref_path.string() + " has " +
                           std::to_string(ref.ids.size()) + " entries, " + hyp_path.string() +
                           " has " + std::to_string(hyp.ids.size()));
  }
  std::unordered_map<std::string, std::size_t> hyp_index;
  for (std::size_t i = 0; i < hyp.ids.size(); ++i) hyp_index[hyp.ids[i]] = i;

  const bool normalize = s.flag("normalize", task == "wer" || task == "acc");
  const bool chars = s.flag("char", false);
  auto prepare = [&](const std::string &text) {
    return normalize ? normalize_text(text) : text;
  };
  auto tokens = [&](const std::string &text) {
    const auto t = prepare(text);
    return chars ? split_chars(t) : split_words(t);
  };

  std::vector<std::string> refs, hyps;
  for (std::size_t i = 0; i < ref.ids.size(); ++i) {
    const auto it = hyp_index.find(ref.ids[i]);
    if (it == hyp_index.end()) {
      throw validation_error("metrics: no hypothesis for '" + ref.ids[i] + "'");
    }
    refs.push_back(ref.texts[i]);
    hyps.push_back(hyp.texts[it->second]);
  }

  std::ostringstream per_utt;
  nlohmann::json summary;
  summary["task"] = task;
  summary["utterances"] = refs.size();
  double score = 0.0;
  if (task == "acc") {
    per_utt << "source_id\tcorrect\n";
    std::vector<std::string> r, h;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      r.push_back(prepare(refs[i]));
      h.push_back(prepare(hyps[i]));
      per_utt << ref.ids[i] << '\t' << (r.back() == h.back() ? 1 : 0) << '\n';
    }
    score = accuracy(r, h);
  } else {
    std::vector<word_seq> r, h;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      r.push_back(tokens(refs[i]));
      h.push_back(tokens(hyps[i]));
    }
    if (task == "bleu") {
      per_utt << "source_id\tbleu\n";
      for (std::size_t i = 0; i < r.size(); ++i) {
        per_utt << ref.ids[i] << '\t'
                << fmt(bleu({r[i]}, {h[i]}, s.count("max-n", 4))) << '\n';
      }
      score = bleu(r, h, s.count("max-n", 4));
    } else {
      per_utt << "source_id\tsubstitutions\tinsertions\tdeletions\tref_len\trate\n";
      for (std::size_t i = 0; i < r.size(); ++i) {
        const auto st = align(r[i], h[i]);
        per_utt << ref.ids[i] << '\t' << st.substitutions << '\t' << st.insertions << '\t'
                << st.deletions << '\t' << st.ref_len << '\t'
                << (st.ref_len == 0 ? std::string("nan") : fmt(st.rate())) << '\n';
      }
      const auto total = corpus_edit_stats(r, h);
      summary["substitutions"] = total.substitutions;
      summary["insertions"] = total.insertions;
      summary["deletions"] = total.deletions;
      summary["ref_len"] = total.ref_len;
      score = task == "wer" ? wer(r, h) : per(r, h);
    }
  }
  summary["score"] = score;

  if (const auto p = s.optional_path("out")) write_text(*p, per_utt.str());
  if (const auto p = s.optional_path("summary")) write_json(*p, summary);
  out << task << '\t' << fmt(score) << '\n';
  return exit_ok;
}

}  // namespace reprbench::cli
