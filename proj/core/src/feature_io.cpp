#include "reprbench/feature_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "binary_io.hpp"
#include "reprbench/random.hpp"

namespace reprbench {

using detail::get_f32;
using detail::get_u32;
using detail::put_f32;
using detail::put_u32;

namespace {

constexpr std::uint8_t srf1_magic[4] = {'S', 'R', 'F', '1'};

}  // namespace

void validate(const feature_sequence &seq) {
  if (seq.dim() == 0) {
    throw validation_error("feature sequence '" + seq.source_id +
                           "': dimension must be at least 1");
  }
  if (seq.rate.numerator == 0 || seq.rate.denominator == 0) {
    throw validation_error("feature sequence '" + seq.source_id +
                           "': frame rate must be positive");
  }
  const auto values = seq.frames.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw validation_error("feature sequence '" + seq.source_id +
                             "': non-finite value at frame " +
                             std::to_string(i / seq.dim()) + ", column " +
                             std::to_string(i % seq.dim()));
    }
  }
}

std::vector<std::uint8_t> encode_features(const feature_sequence &seq) {
  validate(seq);
  if (seq.num_frames() > UINT32_MAX || seq.dim() > UINT32_MAX) {
    throw argument_error("feature sequence too large for SRF1");
  }
  std::vector<std::uint8_t> out;
  out.reserve(srf1_header_bytes + seq.frames.size() * 4);
  for (const auto b : srf1_magic) out.push_back(b);
  put_u32(out, srf1_version);
  put_u32(out, static_cast<std::uint32_t>(seq.num_frames()));
  put_u32(out, static_cast<std::uint32_t>(seq.dim()));
  put_u32(out, seq.layer_id);
  put_u32(out, seq.rate.numerator);
  put_u32(out, seq.rate.denominator);
  for (const float v : seq.frames.values()) {
    put_f32(out, v);
  }
  return out;
}

feature_sequence decode_features(std::span<const std::uint8_t> bytes,
                                 std::string source_id) {
  if (bytes.size() < 4 || !std::equal(std::begin(srf1_magic),
                                      std::end(srf1_magic), bytes.begin())) {
    throw format_error("SRF1: bad magic");
  }
  if (bytes.size() < srf1_header_bytes) {
    throw corruption_error("SRF1: truncated header (" +
                           std::to_string(bytes.size()) + " bytes)");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != srf1_version) {
    throw format_error("SRF1: unsupported version " + std::to_string(version));
  }
  const std::uint64_t t = get_u32(bytes, 8);
  const std::uint64_t d = get_u32(bytes, 12);
  const std::uint64_t expected = srf1_header_bytes + t * d * 4;
  if (bytes.size() != expected) {
    throw corruption_error("SRF1: payload is " +
                           std::to_string(bytes.size() - srf1_header_bytes) +
                           " bytes, header declares " +
                           std::to_string(expected - srf1_header_bytes));
  }

  feature_sequence seq;
  seq.layer_id = get_u32(bytes, 16);
  seq.rate = {get_u32(bytes, 20), get_u32(bytes, 24)};
  seq.source_id = std::move(source_id);
  std::vector<float> values(t * d);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = get_f32(bytes, srf1_header_bytes + 4 * i);
  }
  seq.frames = matrix_f(t, d, std::move(values));
  validate(seq);
  return seq;
}

feature_sequence load_features(const std::filesystem::path &path) {
  const auto bytes = detail::read_file(path);
  try {
    return decode_features(bytes, path.stem().string());
  } catch (const error &e) {
    throw_error(e.kind(), path.string() + ": " + e.what());
  }
}

void store_features(const feature_sequence &seq,
                    const std::filesystem::path &path) {
  detail::write_file(path, encode_features(seq));
}

synth_result synth_structured_features(const synth_spec &spec) {
  if (spec.dim == 0 || spec.modes == 0 || !(spec.noise >= 0.0) ||
      !(spec.mean_run_length >= 1.0)) {
    throw argument_error("synth_features: need dim >= 1, modes >= 1, "
                         "noise >= 0 and mean_run_length >= 1");
  }
  rng gen(spec.seed);
  std::uniform_real_distribution<float> center_dist(-1.0f, 1.0f);
  matrix_f centers(spec.modes, spec.dim);
  for (float &v : centers.values()) {
    v = center_dist(gen);
  }

  // Mode per run: Zipf draws, or a reshuffled bag holding each mode once.
  std::vector<std::uint32_t> bag;
  std::optional<zipf_sampler> zipf;
  if (spec.zipf_exponent > 0.0) {
    zipf.emplace(spec.modes, spec.zipf_exponent);
  }
  auto next_mode = [&]() -> std::uint32_t {
    if (zipf) {
      return static_cast<std::uint32_t>((*zipf)(gen));
    }
    if (bag.empty()) {
      bag.resize(spec.modes);
      std::iota(bag.begin(), bag.end(), 0u);
      std::shuffle(bag.begin(), bag.end(), gen);
    }
    const auto m = bag.back();
    bag.pop_back();
    return m;
  };

  std::vector<std::uint32_t> modes;
  modes.reserve(spec.frames);
  std::geometric_distribution<std::size_t> extra(1.0 / spec.mean_run_length);
  while (modes.size() < spec.frames) {
    const auto m = next_mode();
    const std::size_t run = spec.mean_run_length > 1.0 ? 1 + extra(gen) : 1;
    for (std::size_t i = 0; i < run && modes.size() < spec.frames; ++i) {
      modes.push_back(m);
    }
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  matrix_f frames(spec.frames, spec.dim);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const auto c = centers.row(modes[t]);
    auto row = frames.row(t);
    for (std::size_t j = 0; j < spec.dim; ++j) {
      row[j] = spec.noise > 0.0
                   ? static_cast<float>(c[j] + spec.noise * normal(gen))
                   : c[j];
    }
  }

  synth_result result;
  result.sequence.frames = std::move(frames);
  result.sequence.rate = {50, 1};
  result.sequence.source_id = "synth-" + std::to_string(spec.seed);
  result.centers = std::move(centers);
  result.modes = std::move(modes);
  return result;
}

feature_sequence synth_features(std::size_t t, std::size_t d,
                                std::size_t n_modes, double noise,
                                std::uint64_t seed) {
  synth_spec spec;
  spec.frames = t;
  spec.dim = d;
  spec.modes = n_modes;
  spec.noise = noise;
  spec.seed = seed;
  return synth_structured_features(spec).sequence;
}

const manifest_entry *manifest::find(std::string_view source_id) const {
  for (const auto &e : entries) {
    if (e.source_id == source_id) {
      return &e;
    }
  }
  return nullptr;
}

manifest parse_manifest(std::string_view text,
                        const std::filesystem::path &base_dir) {
  manifest m;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (auto line : detail::split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (line.empty()) {
      continue;
    }
    const auto fields = detail::split(line, '\t');
    if (fields.size() < 2 || fields.size() > 4) {
      throw format_error("manifest line " + std::to_string(line_no) +
                         ": expected 2-4 tab-separated fields");
    }
    manifest_entry e;
    e.source_id = std::string(fields[0]);
    if (e.source_id.empty() || fields[1].empty()) {
      throw format_error("manifest line " + std::to_string(line_no) +
                         ": source id and path are required");
    }
    if (!seen.insert(e.source_id).second) {
      throw validation_error("manifest line " + std::to_string(line_no) +
                             ": duplicate source id '" + e.source_id + "'");
    }
    e.path = std::filesystem::path(std::string(fields[1]));
    if (e.path.is_relative() && !base_dir.empty()) {
      e.path = base_dir / e.path;
    }
    if (fields.size() > 2 && !fields[2].empty()) {
      e.transcript = std::string(fields[2]);
    }
    if (fields.size() > 3 && !fields[3].empty()) {
      e.label = std::string(fields[3]);
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

manifest load_manifest(const std::filesystem::path &path) {
  const auto text = detail::read_text_file(path);
  try {
    return parse_manifest(text, path.parent_path());
  } catch (const error &e) {
    throw_error(e.kind(), path.string() + ": " + e.what());
  }
}

void store_manifest(const manifest &m, const std::filesystem::path &path) {
  std::string out;
  for (const auto &e : m.entries) {
    out += e.source_id;
    out += '\t';
    out += e.path.string();
    out += '\t';
    out += e.transcript.value_or("");
    out += '\t';
    out += e.label.value_or("");
    out += '\n';
  }
  detail::write_text_file(path, out);
}

std::vector<feature_sequence> load_all(const manifest &m) {
  std::vector<feature_sequence> out;
  out.reserve(m.entries.size());
  for (const auto &e : m.entries) {
    auto seq = load_features(e.path);
    seq.source_id = e.source_id;
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace reprbench
