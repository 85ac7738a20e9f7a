#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "reprbench/error.hpp"

namespace reprbench::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

run_config run_config::parse(std::string_view text) {
  run_config cfg;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw config_error("config line " + std::to_string(line_no) + ": unterminated section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) {
        throw config_error("config line " + std::to_string(line_no) + ": empty section name");
      }
      if (section.starts_with("stage.")) {
        const auto name = section.substr(6);
        const bool dup = std::any_of(cfg.stages_.begin(), cfg.stages_.end(),
                                     [&](const stage_entry &s) { return s.name == name; });
        if (name.empty() || dup) {
          throw config_error("config line " + std::to_string(line_no) +
                             ": stage sections need a unique name");
        }
        cfg.stages_.push_back({name, {}, {}, 1});
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      throw config_error("config line " + std::to_string(line_no) + ": empty key");
    }
    cfg.values_[section][key] = value;
    if (section.starts_with("stage.")) {
      auto &stage = cfg.stages_.back();
      if (key == "manifest") {
        stage.manifest = value;
      } else if (key == "task") {
        stage.task = value;
      } else if (key == "epochs") {
        stage.epochs = parse_count(key, value);
      } else {
        throw config_error("config line " + std::to_string(line_no) +
                           ": unknown stage key '" + key + "'");
      }
    }
  }
  for (const auto &s : cfg.stages_) {
    if (s.manifest.empty()) {
      throw config_error("stage '" + s.name + "' has no manifest");
    }
  }
  return cfg;
}

run_config run_config::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw config_error("cannot open config file " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  auto cfg = parse(buf.str());
  cfg.base_dir_ = path.parent_path();
  for (auto &s : cfg.stages_) {
    if (s.manifest.is_relative()) s.manifest = path.parent_path() / s.manifest;
  }
  return cfg;
}

std::optional<std::string> run_config::get(std::string_view section,
                                           std::string_view key) const {
  const auto sec = values_.find(section);
  if (sec == values_.end()) return std::nullopt;
  const auto it = sec->second.find(key);
  if (it == sec->second.end()) return std::nullopt;
  return it->second;
}

void run_config::validate_paths() const {
  for (const auto &s : stages_) {
    if (!std::filesystem::exists(s.manifest)) {
      throw config_error("stage '" + s.name + "': manifest " + s.manifest.string() +
                         " does not exist");
    }
  }
}

std::uint64_t parse_count(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    throw config_error("'" + std::string(key) + "' expects a non-negative integer, got '" +
                       std::string(value) + "'");
  }
  return v;
}

double parse_real(std::string_view key, std::string_view value) {
  double v = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size() || !std::isfinite(v)) {
    throw config_error("'" + std::string(key) + "' expects a number, got '" +
                       std::string(value) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  std::string v(value);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw config_error("'" + std::string(key) + "' expects a boolean, got '" +
                     std::string(value) + "'");
}

settings::settings(std::string command, const run_config *config,
                   std::map<std::string, std::string> flags)
    : command_(std::move(command)), config_(config), flags_(std::move(flags)) {}

std::optional<std::string> settings::find(std::string_view key) const {
  if (const auto it = flags_.find(std::string(key)); it != flags_.end()) return it->second;
  if (config_) {
    if (auto v = config_->get(command_, key)) return v;
    if (auto v = config_->get("", key)) return v;
  }
  return std::nullopt;
}

std::string settings::text(std::string_view key, std::string_view fallback) const {
  return find(key).value_or(std::string(fallback));
}

std::string settings::required(std::string_view key) const {
  auto v = find(key);
  if (!v || v->empty()) {
    throw config_error(command_ + ": missing required setting --" + std::string(key));
  }
  return *v;
}

std::filesystem::path settings::resolve(std::string_view key, const std::string &value) const {
  std::filesystem::path p(value);
  if (p.is_relative() && config_ && !flags_.contains(std::string(key))) {
    return config_->base_dir() / p;
  }
  return p;
}

std::filesystem::path settings::required_path(std::string_view key) const {
  return resolve(key, required(key));
}

std::optional<std::filesystem::path> settings::optional_path(std::string_view key) const {
  auto v = find(key);
  if (!v || v->empty()) return std::nullopt;
  return resolve(key, *v);
}

std::vector<std::filesystem::path> settings::path_list(std::string_view key) const {
  std::vector<std::filesystem::path> out;
  for (const auto &item : list(key, "")) out.push_back(resolve(key, item));
  return out;
}

double settings::real(std::string_view key, double fallback) const {
  const auto v = find(key);
  return v ? parse_real(key, *v) : fallback;
}

std::uint64_t settings::count(std::string_view key, std::uint64_t fallback) const {
  const auto v = find(key);
  return v ? parse_count(key, *v) : fallback;
}

bool settings::flag(std::string_view key, bool fallback) const {
  const auto v = find(key);
  return v ? parse_bool(key, *v) : fallback;
}

std::vector<std::string> settings::list(std::string_view key, std::string_view fallback) const {
  const auto raw = text(key, fallback);
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(raw);
  while (std::getline(in, item, ',')) {
    const auto t = trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::uint64_t settings::seed() const {
  if (const auto v = find("seed")) return parse_count("seed", *v);
  if (const char *env = std::getenv("REPRBENCH_SEED"); env && *env) {
    return parse_count("REPRBENCH_SEED", env);
  }
  return 0;
}

}  // namespace reprbench::cli
