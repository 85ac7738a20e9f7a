#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reprbench::cli {

/// One stage of a multi-stage data mix. Only parsed and validated; nothing
/// in this tool trains on stage sequences.
struct stage_entry {
  std::string name;
  std::filesystem::path manifest;
  std::string task;
  std::uint64_t epochs = 1;
};

/// Line-based "key = value" configuration with "[section]" headers. Keys
/// before the first header are global. "[stage.<name>]" sections describe a
/// data-mix stage, in file order. '#' and ';' start comment lines.
class run_config {
 public:
  static run_config parse(std::string_view text);
  static run_config load(const std::filesystem::path &path);

  std::optional<std::string> get(std::string_view section, std::string_view key) const;
  const std::vector<stage_entry> &stages() const noexcept { return stages_; }

  /// Throws config_error when a stage manifest does not exist.
  void validate_paths() const;

  /// Directory relative path values are resolved against; empty for parsed text.
  const std::filesystem::path &base_dir() const noexcept { return base_dir_; }

 private:
  std::filesystem::path base_dir_;
  std::map<std::string, std::map<std::string, std::string, std::less<>>, std::less<>> values_;
  std::vector<stage_entry> stages_;
};

/// Resolves a command's settings: command-line flag, then the command's
/// config section, then the global section, then the caller's default.
/// Relative paths taken from a config file resolve against its directory.
class settings {
 public:
  settings(std::string command, const run_config *config,
           std::map<std::string, std::string> flags);

  const std::string &command() const noexcept { return command_; }

  std::optional<std::string> find(std::string_view key) const;
  std::string text(std::string_view key, std::string_view fallback) const;
  std::string required(std::string_view key) const;
  std::filesystem::path required_path(std::string_view key) const;
  std::optional<std::filesystem::path> optional_path(std::string_view key) const;
  /// Comma-separated paths.
  std::vector<std::filesystem::path> path_list(std::string_view key) const;

  double real(std::string_view key, double fallback) const;
  std::uint64_t count(std::string_view key, std::uint64_t fallback) const;
  bool flag(std::string_view key, bool fallback) const;
  std::vector<std::string> list(std::string_view key, std::string_view fallback) const;

  /// Top-level seed: --seed, config "seed", then REPRBENCH_SEED, then 0.
  std::uint64_t seed() const;

  const run_config *config() const noexcept { return config_; }

 private:
  std::filesystem::path resolve(std::string_view key, const std::string &value) const;

  std::string command_;
  const run_config *config_;
  std::map<std::string, std::string> flags_;
};

std::uint64_t parse_count(std::string_view key, std::string_view value);
double parse_real(std::string_view key, std::string_view value);
bool parse_bool(std::string_view key, std::string_view value);

}  // namespace reprbench::cli
