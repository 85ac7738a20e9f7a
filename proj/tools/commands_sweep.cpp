#include <atomic>
#include <ostream>
#include <sstream>
#include <thread>

#include "command_util.hpp"
#include "commands.hpp"
#include "reprbench/efficiency.hpp"
#include "reprbench/random.hpp"

namespace reprbench::cli {

namespace {

struct cell_spec {
  std::size_t k = 0;
  std::size_t bpe_vocab = 0;  // 0 disables BPE
  bool dedup = true;
  std::size_t stack = 1;
};

struct cell_result {
  std::size_t tokens = 0;
  double mean_ratio = 0.0;
  double corpus_ratio = 0.0;
  double bits_per_second = 0.0;
  std::optional<double> discrete_accuracy;
  std::optional<double> continuous_accuracy;
  std::optional<error_kind> failure;
  std::string message;
};

struct sweep_inputs {
  const manifest *m = nullptr;
  const std::vector<feature_sequence> *seqs = nullptr;
  std::optional<std::vector<std::string>> labels;
  std::size_t frames = 0;
  double seconds = 0.0;
};

double probe_accuracy(probe_dataset data, const settings &s) {
  const auto config = probe_settings(s, derive_seed(s.seed(), "probe"));
  const auto split = make_split(data.size(), s.real("test-fraction", 0.25),
                                derive_seed(config.seed, "split"));
  const auto train = subset(data, split.train);
  const auto trained = train_probe(train, config);
  return eval_probe(trained.model, subset(data, split.test));
}

cell_result run_cell(const cell_spec &cell, const sweep_inputs &in, const settings &s,
                     const std::filesystem::path &dir) {
  if (cell.bpe_vocab > 0 && !cell.dedup) {
    throw config_error("bpe requires dedup=true");
  }
  const auto &seqs = *in.seqs;
  const auto opts = kmeans_settings(s, cell.k);
  auto km = train_kmeans(pool_frames(seqs), opts);
  stamp_codebook(km, opts, seqs, s.required_path("manifest"));
  store_codebook(km.model, dir / "codebook.scb");

  std::vector<token_sequence> corpus;
  for (const auto &seq : seqs) {
    auto t = quantize(seq, km.model);
    corpus.push_back(cell.dedup ? deduplicate(t) : std::move(t));
  }
  std::size_t vocab = km.model.k();
  if (cell.bpe_vocab > 0) {
    const auto model = train_bpe(corpus, static_cast<std::uint32_t>(km.model.k()),
                                 static_cast<std::uint32_t>(cell.bpe_vocab));
    store_bpe(model, dir / "bpe.txt");
    const bpe_codec codec(model);
    for (auto &t : corpus) {
      t.ids = codec.encode(t.ids);
      t.stage = token_stage::bpe;
    }
    vocab = model.vocab_size();
  }
  store_token_corpus(corpus, dir / "tokens.tsv");

  std::vector<std::size_t> raw_lengths;
  for (const auto &seq : seqs) raw_lengths.push_back(seq.num_frames());
  cell_result r;
  r.tokens = total_tokens(corpus);
  r.mean_ratio = mean_ratio(raw_lengths, corpus);
  r.corpus_ratio = static_cast<double>(r.tokens) / static_cast<double>(in.frames);
  // a single-symbol vocabulary carries no information
  r.bits_per_second = vocab < 2 ? 0.0
                                : bit_rate({vocab, 1, static_cast<double>(r.tokens) / in.seconds,
                                            bit_mode::exact_log2});

  if (in.labels) {
    std::vector<std::vector<std::uint32_t>> ids;
    for (const auto &t : corpus) ids.push_back(t.ids);
    r.discrete_accuracy = probe_accuracy(
        make_discrete_dataset(manifest_ids(*in.m), std::move(ids), *in.labels, vocab), s);
    r.continuous_accuracy = probe_accuracy(
        make_continuous_dataset(manifest_ids(*in.m), stacked_features(seqs, cell.stack),
                                *in.labels),
        s);
  }
  return r;
}

std::vector<std::size_t> count_list(const settings &s, std::string_view key,
                                    std::string_view fallback) {
  std::vector<std::size_t> out;
  for (const auto &v : s.list(key, fallback)) out.push_back(parse_count(key, v));
  if (out.empty()) throw config_error(std::string(key) + " is empty");
  return out;
}

std::string opt_fmt(const std::optional<double> &v) { return v ? fmt(*v) : "-"; }

}  // namespace

int cmd_sweep(const settings &s, std::ostream &out) {
  const auto ks = count_list(s, "grid-k", s.text("k", "2000"));
  const auto bpes = count_list(s, "grid-bpe", s.text("vocab", "6000"));
  const auto stacks = count_list(s, "grid-stack", s.text("stack", "2"));
  std::vector<bool> dedups;
  for (const auto &v : s.list("grid-dedup", s.text("dedup", "true"))) {
    dedups.push_back(parse_bool("grid-dedup", v));
  }
  if (dedups.empty()) throw config_error("grid-dedup is empty");
  const auto out_dir = s.required_path("out-dir");

  const auto m = load_manifest(s.required_path("manifest"));
  const auto seqs = load_all(m);
  if (seqs.empty()) throw argument_error("sweep: manifest lists no files");
  sweep_inputs in;
  in.m = &m;
  in.seqs = &seqs;
  bool labelled = true;
  for (const auto &e : m.entries) labelled = labelled && e.label.has_value();
  if (labelled && s.flag("probe", true)) in.labels = manifest_labels(m);
  for (const auto &seq : seqs) {
    in.frames += seq.num_frames();
    in.seconds += static_cast<double>(seq.num_frames()) / seq.rate.hz();
  }

  std::vector<cell_spec> cells;
  for (const auto k : ks)
    for (const auto b : bpes)
      for (const bool d : dedups)
        for (const auto st : stacks) cells.push_back({k, b, d, st});

  std::vector<cell_result> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto dir = out_dir / ("cell-" + std::to_string(i));
      try {
        std::filesystem::create_directories(dir);
        results[i] = run_cell(cells[i], in, s, dir);
      } catch (const error &e) {
        results[i].failure = e.kind();
        results[i].message = e.what();
      } catch (const std::exception &e) {
        results[i].failure = error_kind::io;
        results[i].message = e.what();
      }
    }
  };
  const auto workers = std::max<std::size_t>(1, std::min<std::size_t>(s.count("parallel", 1),
                                                                      cells.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }

  std::ostringstream tsv;
  tsv << "cell\tk\tbpe_vocab\tdedup\tstack\ttokens\tmean_ratio\tcorpus_ratio\t"
         "bits_per_second\tdiscrete_accuracy\tcontinuous_accuracy\tstatus\n";
  int code = exit_ok;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto &c = cells[i];
    const auto &r = results[i];
    tsv << i << '\t' << c.k << '\t' << c.bpe_vocab << '\t' << (c.dedup ? "on" : "off") << '\t'
        << c.stack << '\t';
    if (r.failure) {
      std::string kind = to_string(*r.failure);
      kind = kind.substr(0, kind.find(' '));
      tsv << "-\t-\t-\t-\t-\t-\tfailed:" << kind << '\n';
      out << "cell " << i << " failed: " << r.message << '\n';
      code = std::max(code, exit_code(*r.failure));
    } else {
      tsv << r.tokens << '\t' << fmt(r.mean_ratio) << '\t' << fmt(r.corpus_ratio) << '\t'
          << fmt(r.bits_per_second) << '\t' << opt_fmt(r.discrete_accuracy) << '\t'
          << opt_fmt(r.continuous_accuracy) << "\tok\n";
    }
  }
  write_text(out_dir / "sweep.tsv", tsv.str());
  out << tsv.str();
  return code;
}

}  // namespace reprbench::cli
