#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace reprbench::cli {

int exit_code(error_kind kind) noexcept {
  switch (kind) {
    case error_kind::config:
    case error_kind::argument:
      return exit_config;
    case error_kind::divergence:
      return exit_divergence;
    default:
      return exit_data;
  }
}

namespace {

const std::vector<option_spec> probe_options = {
    {"lr", "learning rate (0.05)"},
    {"batch", "mini-batch size (32)"},
    {"epochs", "training epochs (100)"},
    {"l2", "L2 penalty (1e-4)"},
    {"hidden", "probe hidden width (32)"},
    {"max-halvings", "learning-rate halvings before giving up (10)"},
    {"test-fraction", "held-out fraction (0.25)"},
};

const std::vector<option_spec> kmeans_options_spec = {
    {"max-iters", "Lloyd iteration cap (100)"},
    {"tol", "relative inertia tolerance (1e-6)"},
    {"stride", "train on every n-th frame (1)"},
};

std::vector<option_spec> join(std::vector<option_spec> a, const std::vector<option_spec> &b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

const std::vector<command_spec> &command_table() {
  static const std::vector<command_spec> table = {
      {"kmeans", "train a codebook over a feature manifest",
       join({{"manifest", "feature manifest TSV"},
             {"k", "number of centroids (2000)"},
             {"out", "codebook file to write"},
             {"trace", "inertia trace TSV to write"}},
            kmeans_options_spec),
       cmd_kmeans},
      {"tokenize", "quantize a manifest into a token corpus",
       {{"manifest", "feature manifest TSV"},
        {"codebook", "codebook file"},
        {"dedup", "collapse repeated ids (true)"},
        {"bpe", "BPE model to apply after dedup"},
        {"out", "token corpus TSV to write"},
        {"summary", "JSON summary to write"}},
       cmd_tokenize},
      {"bpe-train", "learn BPE merges over a dedup token corpus",
       {{"tokens", "dedup token corpus"},
        {"base-vocab", "base vocabulary size"},
        {"codebook", "take base vocabulary from this codebook"},
        {"vocab", "target vocabulary size (6000)"},
        {"out", "BPE model file to write"}},
       cmd_bpe_train},
      {"encode", "apply BPE to a dedup token corpus",
       {{"tokens", "dedup token corpus"}, {"bpe", "BPE model"}, {"out", "output corpus"}},
       cmd_encode},
      {"decode", "expand a BPE token corpus back to dedup ids",
       {{"tokens", "BPE token corpus"}, {"bpe", "BPE model"}, {"out", "output corpus"}},
       cmd_decode},
      {"stack", "stack adjacent frames and optionally project them",
       {{"input", "SRF1 feature file"},
        {"factor", "stacking factor (2)"},
        {"adapter", "adapter prefix to load"},
        {"hidden", "initialise a fresh adapter of this width"},
        {"adapter-out", "prefix to store a fresh adapter"},
        {"out", "SRF1 file to write"}},
       cmd_stack},
      {"report", "data-size table and token-frequency bundle",
       {{"raw", "raw token corpus"},
        {"dedup", "dedup token corpus"},
        {"bpe-tokens", "BPE token corpus"},
        {"seconds", "audio duration for the table (1)"},
        {"bit-depth", "continuous bit depth (32)"},
        {"dim", "continuous feature width (1024)"},
        {"frame-rate", "continuous frame rate after downsampling (25)"},
        {"code-bits", "bits per discrete code (13)"},
        {"bpe-bits", "bits per BPE code (code-bits)"},
        {"code-rate", "raw codes per second (50)"},
        {"threshold", "cumulative coverage threshold (0.95)"},
        {"vocab", "vocabulary size for the frequency report"},
        {"out-dir", "directory for data_size.tsv, frequency.tsv, summary.json"}},
       cmd_report},
      {"freq", "token-frequency report",
       {{"tokens", "token corpus"},
        {"threshold", "cumulative coverage threshold (0.95)"},
        {"vocab", "vocabulary size"},
        {"out", "frequency TSV to write"},
        {"summary", "JSON summary to write"}},
       cmd_freq},
      {"prune", "remap the least frequent ids onto their nearest retained centroid",
       {{"tokens", "raw token corpus"},
        {"codebook", "codebook file"},
        {"fraction", "fraction of ids to prune (0.1)"},
        {"out", "output corpus"},
        {"remap", "remap TSV to write"}},
       cmd_prune},
      {"metrics", "score hypotheses against references",
       {{"task", "wer, per, acc or bleu"},
        {"ref", "reference TSV (source_id, text)"},
        {"hyp", "hypothesis TSV (source_id, text)"},
        {"normalize", "lowercase and strip punctuation"},
        {"char", "score characters instead of words"},
        {"max-n", "BLEU n-gram order (4)"},
        {"out", "per-utterance TSV to write"},
        {"summary", "JSON summary to write"}},
       cmd_metrics},
      {"probe", "train and evaluate a classification probe",
       join({{"manifest", "labelled feature manifest"},
             {"kind", "discrete or continuous"},
             {"tokens", "token corpus for discrete probes"},
             {"vocab", "token vocabulary size"},
             {"stack", "stacking factor for continuous probes (1)"},
             {"out", "prefix for the stored probe"},
             {"summary", "JSON summary to write"}},
            probe_options),
       cmd_probe},
      {"layer-sweep", "probe every layer and score it",
       join(join({{"manifests", "comma-separated manifests, one per layer"},
                  {"kind", "discrete or continuous"},
                  {"k", "centroids for discrete probes (64)"},
                  {"dedup", "dedup discrete tokens (true)"},
                  {"stack", "stacking factor for continuous probes (1)"},
                  {"parallel", "concurrent probes (1)"},
                  {"out", "layer score TSV to write"}},
                 probe_options),
            kmeans_options_spec),
       cmd_layer_sweep},
      {"align", "per-layer max-cosine alignment between speech and text states",
       {{"speech", "speech-side manifest"},
        {"text", "text-side manifest"},
        {"out", "alignment TSV to write"}},
       cmd_align},
      {"sweep", "grid over centroids, BPE size, dedup and stacking",
       join(join({{"manifest", "feature manifest (labels enable probes)"},
                  {"grid-k", "comma-separated centroid counts"},
                  {"grid-bpe", "comma-separated BPE sizes, 0 disables"},
                  {"grid-dedup", "comma-separated on/off values"},
                  {"grid-stack", "comma-separated stacking factors"},
                  {"probe", "run probes when labels exist (true)"},
                  {"parallel", "concurrent cells (1)"},
                  {"out-dir", "output directory"}},
                 probe_options),
            kmeans_options_spec),
       cmd_sweep},
  };
  return table;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"speech representation toolkit", "reprbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "reprbench 0.1.0");

  struct bound {
    const command_spec *spec = nullptr;
    CLI::App *sub = nullptr;
    std::map<std::string, std::string> values;
    std::string config;
    std::string seed;
  };
  std::vector<bound> subs(command_table().size());
  for (std::size_t i = 0; i < subs.size(); ++i) {
    auto &b = subs[i];
    b.spec = &command_table()[i];
    b.sub = app.add_subcommand(b.spec->name, b.spec->help);
    b.sub->add_option("--config", b.config, "run configuration file");
    b.sub->add_option("--seed", b.seed, "top-level seed (REPRBENCH_SEED)");
    for (const auto &o : b.spec->options) {
      b.sub->add_option(std::string("--") + o.key, b.values[o.key], o.help);
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  for (auto &b : subs) {
    if (!b.sub->parsed()) continue;
    try {
      std::map<std::string, std::string> flags;
      for (const auto &o : b.spec->options) {
        if (b.sub->count(std::string("--") + o.key) > 0) flags[o.key] = b.values[o.key];
      }
      if (b.sub->count("--seed") > 0) flags["seed"] = b.seed;
      std::optional<run_config> config;
      if (b.sub->count("--config") > 0) {
        config = run_config::load(b.config);
        config->validate_paths();
      }
      const settings s(b.spec->name, config ? &*config : nullptr, std::move(flags));
      return b.spec->run(s, out);
    } catch (const error &e) {
      err << "reprbench " << b.spec->name << ": " << to_string(e.kind()) << ": "
          << e.what() << '\n';
      return exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error &e) {
      err << "reprbench " << b.spec->name << ": io error: " << e.what() << '\n';
      return exit_data;
    }
  }
  return exit_config;
}

}  // namespace reprbench::cli
