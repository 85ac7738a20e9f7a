#include <algorithm>
#include <ostream>
#include <set>
#include <sstream>

#include "command_util.hpp"
#include "commands.hpp"
#include "reprbench/continuous.hpp"
#include "reprbench/random.hpp"

namespace reprbench::cli {

kmeans_options kmeans_settings(const settings &s, std::size_t k) {
  kmeans_options opts;
  opts.k = k;
  opts.max_iters = s.count("max-iters", 100);
  opts.tol = s.real("tol", 1e-6);
  opts.frame_stride = s.count("stride", 1);
  opts.seed = derive_seed(s.seed(), "kmeans");
  return opts;
}

void stamp_codebook(kmeans_result &result, const kmeans_options &opts,
                    const std::vector<feature_sequence> &seqs,
                    const std::filesystem::path &manifest_path) {
  result.model.meta["layer_id"] = std::to_string(seqs.front().layer_id);
  result.model.meta["manifest"] = manifest_path.filename().string();
  result.model.meta["seed"] = std::to_string(opts.seed);
  result.model.meta["iterations"] = std::to_string(result.iterations);
}

int cmd_kmeans(const settings &s, std::ostream &out) {
  const auto manifest_path = s.required_path("manifest");
  const auto out_path = s.required_path("out");
  const auto opts = kmeans_settings(s, s.count("k", 2000));
  const auto m = load_manifest(manifest_path);
  const auto seqs = load_all(m);
  if (seqs.empty()) throw argument_error("manifest " + manifest_path.string() + " lists no files");

  auto result = train_kmeans(pool_frames(seqs), opts);
  stamp_codebook(result, opts, seqs, manifest_path);
  store_codebook(result.model, out_path);

  if (const auto trace = s.optional_path("trace")) {
    std::ostringstream tsv;
    tsv << "iteration\tinertia\n";
    for (std::size_t i = 0; i < result.inertia_trace.size(); ++i) {
      tsv << i << '\t' << fmt(result.inertia_trace[i]) << '\n';
    }
    write_text(*trace, tsv.str());
  }

  std::set<std::uint32_t> used;
  for (const auto &seq : seqs) {
    const auto t = quantize(seq, result.model);
    used.insert(t.ids.begin(), t.ids.end());
  }
  out << "k\t" << result.model.k() << '\n'
      << "iterations\t" << result.iterations << '\n'
      << "reseeds\t" << result.reseeds << '\n'
      << "inertia\t" << fmt(result.model.trained_inertia) << '\n'
      << "used_clusters\t" << used.size() << '\n';
  return exit_ok;
}

int cmd_tokenize(const settings &s, std::ostream &out) {
  const bool dedup = s.flag("dedup", true);
  const auto bpe_path = s.optional_path("bpe");
  if (bpe_path && !dedup) {
    throw config_error("tokenize: bpe requires dedup=true");
  }
  const auto cb = load_codebook(s.required_path("codebook"));
  const auto out_path = s.required_path("out");
  const auto m = load_manifest(s.required_path("manifest"));
  std::optional<bpe_codec> codec;
  if (bpe_path) codec.emplace(load_bpe(*bpe_path));

  std::vector<token_sequence> corpus;
  std::vector<std::size_t> raw_lengths;
  for (const auto &seq : load_all(m)) {
    auto t = quantize(seq, cb);
    raw_lengths.push_back(t.size());
    if (dedup) t = deduplicate(t);
    if (codec) {
      t.ids = codec->encode(t.ids);
      t.stage = token_stage::bpe;
    }
    corpus.push_back(std::move(t));
  }
  store_token_corpus(corpus, out_path);

  std::size_t raw_total = 0;
  for (const auto n : raw_lengths) raw_total += n;
  const double ratio = mean_ratio(raw_lengths, corpus);
  const double corpus_ratio =
      static_cast<double>(total_tokens(corpus)) / static_cast<double>(raw_total);
  if (const auto summary = s.optional_path("summary")) {
    nlohmann::json j;
    j["utterances"] = corpus.size();
    j["frames"] = raw_total;
    j["tokens"] = total_tokens(corpus);
    j["stage"] = to_string(corpus.empty() ? token_stage::raw : corpus.front().stage);
    j["mean_ratio"] = ratio;
    j["corpus_ratio"] = corpus_ratio;
    write_json(*summary, j);
  }
  out << "utterances\t" << corpus.size() << '\n'
      << "frames\t" << raw_total << '\n'
      << "tokens\t" << total_tokens(corpus) << '\n'
      << "mean_ratio\t" << fmt(ratio) << '\n'
      << "corpus_ratio\t" << fmt(corpus_ratio) << '\n';
  return exit_ok;
}

int cmd_bpe_train(const settings &s, std::ostream &out) {
  const auto corpus = load_nonempty_corpus(s.required_path("tokens"));
  auto base = s.count("base-vocab", 0);
  if (base == 0) {
    if (const auto cb = s.optional_path("codebook")) base = load_codebook(*cb).k();
  }
  if (base == 0) throw config_error("bpe-train: set base-vocab or codebook");
  const auto target = s.count("vocab", 6000);
  const auto model = train_bpe(corpus, static_cast<std::uint32_t>(base),
                               static_cast<std::uint32_t>(target));
  store_bpe(model, s.required_path("out"));
  out << "base_vocab\t" << model.base_vocab << '\n'
      << "merges\t" << model.merges.size() << '\n'
      << "vocab\t" << model.vocab_size() << '\n'
      << "stopped_early\t" << (model.stopped_early ? "true" : "false") << '\n';
  return exit_ok;
}

int cmd_encode(const settings &s, std::ostream &out) {
  const auto corpus = load_token_corpus(s.required_path("tokens"));
  const bpe_codec codec(load_bpe(s.required_path("bpe")));
  std::vector<token_sequence> encoded;
  for (const auto &t : corpus) {
    if (t.stage != token_stage::dedup) {
      throw state_error("encode: sequence '" + t.source_id + "' is " +
                        to_string(t.stage) + ", expected dedup");
    }
    encoded.push_back({codec.encode(t.ids), token_stage::bpe, t.source_id});
  }
  store_token_corpus(encoded, s.required_path("out"));
  out << "ratio\t" << fmt(length_reduction_ratio(corpus, encoded)) << '\n';
  return exit_ok;
}

int cmd_decode(const settings &s, std::ostream &out) {
  const auto corpus = load_token_corpus(s.required_path("tokens"));
  const bpe_codec codec(load_bpe(s.required_path("bpe")));
  std::vector<token_sequence> decoded;
  for (const auto &t : corpus) {
    if (t.stage != token_stage::bpe) {
      throw state_error("decode: sequence '" + t.source_id + "' is " +
                        to_string(t.stage) + ", expected bpe");
    }
    decoded.push_back({codec.decode(t.ids), token_stage::dedup, t.source_id});
  }
  store_token_corpus(decoded, s.required_path("out"));
  out << "utterances\t" << decoded.size() << '\n'
      << "tokens\t" << total_tokens(decoded) << '\n';
  return exit_ok;
}

int cmd_stack(const settings &s, std::ostream &out) {
  const auto seq = load_features(s.required_path("input"));
  const auto factor = s.count("factor", 2);
  const auto stacked = downsample_stack(seq, factor);

  feature_sequence result;
  result.layer_id = seq.layer_id;
  result.source_id = seq.source_id;
  result.rate = {seq.rate.numerator,
                 static_cast<std::uint32_t>(seq.rate.denominator * factor)};

  std::optional<linear_adapter> adapter;
  if (const auto prefix = s.optional_path("adapter")) {
    adapter = load_adapter(*prefix);
  } else if (s.find("hidden")) {
    adapter = init_adapter(stacked.frames.cols(), s.count("hidden", 0),
                           derive_seed(s.seed(), "adapter"));
    if (const auto save = s.optional_path("adapter-out")) store_adapter(*adapter, *save);
  }
  if (adapter) {
    const auto projected = project(stacked, *adapter);
    result.frames = matrix_f(projected.rows(), projected.cols());
    for (std::size_t i = 0; i < projected.size(); ++i) {
      result.frames.values()[i] = static_cast<float>(projected.values()[i]);
    }
  } else {
    result.frames = stacked.frames;
  }
  store_features(result, s.required_path("out"));
  out << "frames\t" << result.num_frames() << '\n'
      << "dim\t" << result.dim() << '\n'
      << "frame_rate\t" << fmt(result.rate.hz()) << '\n';
  return exit_ok;
}

}  // namespace reprbench::cli
