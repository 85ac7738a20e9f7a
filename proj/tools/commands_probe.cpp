#include <ostream>
#include <unordered_map>

#include "command_util.hpp"
#include "commands.hpp"
#include "reprbench/continuous.hpp"
#include "reprbench/random.hpp"

namespace reprbench::cli {

probe_config probe_settings(const settings &s, std::uint64_t seed) {
  probe_config c;
  c.learning_rate = s.real("lr", c.learning_rate);
  c.batch_size = s.count("batch", c.batch_size);
  c.epochs = s.count("epochs", c.epochs);
  c.l2 = s.real("l2", c.l2);
  c.hidden = s.count("hidden", c.hidden);
  c.max_lr_halvings = s.count("max-halvings", c.max_lr_halvings);
  c.seed = seed;
  return c;
}

std::vector<matrix_f> stacked_features(const std::vector<feature_sequence> &seqs,
                                       std::size_t factor) {
  std::vector<matrix_f> out;
  out.reserve(seqs.size());
  for (const auto &seq : seqs) {
    out.push_back(factor > 1 ? downsample_stack(seq, factor).frames : seq.frames);
  }
  return out;
}

nlohmann::json stages_json(const settings &s) {
  auto stages = nlohmann::json::array();
  if (s.config() == nullptr) return stages;
  for (const auto &st : s.config()->stages()) {
    stages.push_back({{"name", st.name},
                      {"manifest", st.manifest.string()},
                      {"task", st.task},
                      {"epochs", st.epochs}});
  }
  return stages;
}

namespace {

probe_dataset discrete_from_tokens(const manifest &m, const std::filesystem::path &tokens_path,
                                   std::size_t vocab) {
  const auto corpus = load_token_corpus(tokens_path);
  std::unordered_map<std::string, const token_sequence *> by_id;
  for (const auto &t : corpus) by_id[t.source_id] = &t;
  std::vector<std::vector<std::uint32_t>> tokens;
  for (const auto &e : m.entries) {
    const auto it = by_id.find(e.source_id);
    if (it == by_id.end()) {
      throw validation_error("token corpus " + tokens_path.string() + " has no entry for '" +
                             e.source_id + "'");
    }
    tokens.push_back(it->second->ids);
  }
  if (vocab == 0) {
    for (const auto &t : tokens) {
      for (const auto id : t) vocab = std::max<std::size_t>(vocab, id + std::size_t{1});
    }
  }
  return make_discrete_dataset(manifest_ids(m), std::move(tokens), manifest_labels(m), vocab);
}

// All files of one manifest must come from a single layer.
std::uint32_t common_layer(const std::vector<feature_sequence> &seqs,
                           const std::filesystem::path &path) {
  if (seqs.empty()) throw argument_error("manifest " + path.string() + " lists no files");
  for (const auto &seq : seqs) {
    if (seq.layer_id != seqs.front().layer_id) {
      throw validation_error("manifest " + path.string() + " mixes layers " +
                             std::to_string(seqs.front().layer_id) + " and " +
                             std::to_string(seq.layer_id));
    }
  }
  return seqs.front().layer_id;
}

}  // namespace

int cmd_probe(const settings &s, std::ostream &out) {
  const auto m = load_manifest(s.required_path("manifest"));
  const auto kind = parse_probe_kind(s.text("kind", "continuous"));
  probe_dataset data;
  if (kind == probe_kind::embedding_bag_discrete) {
    data = discrete_from_tokens(m, s.required_path("tokens"), s.count("vocab", 0));
  } else {
    data = make_continuous_dataset(manifest_ids(m),
                                   stacked_features(load_all(m), s.count("stack", 1)),
                                   manifest_labels(m));
  }
  const auto config = probe_settings(s, derive_seed(s.seed(), "probe"));
  const auto split = make_split(data.size(), s.real("test-fraction", 0.25),
                                derive_seed(config.seed, "split"));
  const auto train = subset(data, split.train);
  const auto test = subset(data, split.test);
  const auto trained = train_probe(train, config);
  const double train_acc = eval_probe(trained.model, train);
  const double test_acc = eval_probe(trained.model, test);

  if (const auto prefix = s.optional_path("out")) store_probe(trained.model, *prefix);
  if (const auto summary = s.optional_path("summary")) {
    nlohmann::json j;
    j["kind"] = to_string(kind);
    j["train_size"] = train.size();
    j["test_size"] = test.size();
    j["train_accuracy"] = train_acc;
    j["test_accuracy"] = test_acc;
    j["final_loss"] = trained.loss_trace.empty() ? 0.0 : trained.loss_trace.back();
    j["loss_trace"] = trained.loss_trace;
    j["lr_halvings"] = trained.lr_halvings;
    j["final_learning_rate"] = trained.final_learning_rate;
    j["stalled"] = trained.stalled;
    j["stages"] = stages_json(s);
    write_json(*summary, j);
  }
  out << "train_accuracy\t" << fmt(train_acc) << '\n'
      << "test_accuracy\t" << fmt(test_acc) << '\n'
      << "lr_halvings\t" << trained.lr_halvings << '\n';
  if (trained.stalled) out << "warning\tprobe training stalled\n";
  return exit_ok;
}

int cmd_layer_sweep(const settings &s, std::ostream &out) {
  const auto kind = parse_probe_kind(s.text("kind", "continuous"));
  const auto paths = s.path_list("manifests");
  if (paths.empty()) throw config_error("layer-sweep: manifests is empty");
  const auto base = s.seed();
  const auto stack = s.count("stack", 1);

  std::map<std::uint32_t, probe_dataset> per_layer;
  for (const auto &path : paths) {
    const auto m = load_manifest(path);
    const auto seqs = load_all(m);
    const auto layer = common_layer(seqs, path);
    if (per_layer.contains(layer)) {
      throw validation_error("layer-sweep: layer " + std::to_string(layer) +
                             " appears in more than one manifest");
    }
    if (kind == probe_kind::embedding_bag_discrete) {
      const auto k = s.count("k", 64);
      const auto km = train_kmeans(pool_frames(seqs), kmeans_settings(s, k));
      const bool dedup = s.flag("dedup", true);
      std::vector<std::vector<std::uint32_t>> tokens;
      for (const auto &seq : seqs) {
        auto t = quantize(seq, km.model);
        tokens.push_back(dedup ? deduplicate(t).ids : t.ids);
      }
      per_layer.emplace(layer, make_discrete_dataset(manifest_ids(m), std::move(tokens),
                                                     manifest_labels(m), km.model.k()));
    } else {
      per_layer.emplace(layer, make_continuous_dataset(manifest_ids(m),
                                                       stacked_features(seqs, stack),
                                                       manifest_labels(m)));
    }
  }

  sweep_options opts;
  opts.probe = probe_settings(s, derive_seed(base, "probe"));
  opts.test_fraction = s.real("test-fraction", 0.25);
  opts.workers = s.count("parallel", 1);
  const auto scores = layer_sweep(per_layer, opts);
  const auto table = format_layer_scores(scores);
  if (const auto p = s.optional_path("out")) write_text(*p, table);
  out << table;
  return exit_ok;
}

namespace {

std::map<std::uint32_t, matrix_f> vectors_by_layer(const std::filesystem::path &path) {
  std::map<std::uint32_t, matrix_f> out;
  for (const auto &seq : load_all(load_manifest(path))) {
    auto [it, inserted] = out.try_emplace(seq.layer_id, 0, seq.dim());
    if (it->second.cols() != seq.dim()) {
      throw validation_error(path.string() + ": layer " + std::to_string(seq.layer_id) +
                             " mixes widths " + std::to_string(it->second.cols()) + " and " +
                             std::to_string(seq.dim()) + " ('" + seq.source_id + "')");
    }
    for (std::size_t r = 0; r < seq.num_frames(); ++r) it->second.append_row(seq.frames.row(r));
  }
  return out;
}

}  // namespace

int cmd_align(const settings &s, std::ostream &out) {
  const auto speech = vectors_by_layer(s.required_path("speech"));
  const auto text = vectors_by_layer(s.required_path("text"));
  const auto records = alignment_similarity(speech, text);
  const auto table = format_alignment(records);
  if (const auto p = s.optional_path("out")) write_text(*p, table);
  out << table;
  return exit_ok;
}

}  // namespace reprbench::cli
