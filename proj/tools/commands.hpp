#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "reprbench/error.hpp"

namespace reprbench::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_data = 3;
inline constexpr int exit_divergence = 4;

int exit_code(error_kind kind) noexcept;

struct option_spec {
  const char *key;
  const char *help;
};

struct command_spec {
  const char *name;
  const char *help;
  std::vector<option_spec> options;
  int (*run)(const settings &, std::ostream &);
};

const std::vector<command_spec> &command_table();

/// Parses argv, dispatches to the chosen subcommand and maps errors onto
/// exit codes. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

int cmd_kmeans(const settings &s, std::ostream &out);
int cmd_tokenize(const settings &s, std::ostream &out);
int cmd_bpe_train(const settings &s, std::ostream &out);
int cmd_encode(const settings &s, std::ostream &out);
int cmd_decode(const settings &s, std::ostream &out);
int cmd_stack(const settings &s, std::ostream &out);
int cmd_report(const settings &s, std::ostream &out);
int cmd_freq(const settings &s, std::ostream &out);
int cmd_prune(const settings &s, std::ostream &out);
int cmd_metrics(const settings &s, std::ostream &out);
int cmd_probe(const settings &s, std::ostream &out);
int cmd_layer_sweep(const settings &s, std::ostream &out);
int cmd_align(const settings &s, std::ostream &out);
int cmd_sweep(const settings &s, std::ostream &out);

}  // namespace reprbench::cli
