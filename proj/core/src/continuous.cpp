#include "reprbench/continuous.hpp"

#include <algorithm>
#include <cmath>

#include "reprbench/random.hpp"

namespace reprbench {

stacked_sequence downsample_stack(const feature_sequence &seq, std::size_t factor) {
  if (factor == 0) {
    throw argument_error("downsample_stack: stack factor must be at least 1");
  }
  const std::size_t d = seq.dim();
  const std::size_t n = seq.num_frames() / factor;
  stacked_sequence out;
  out.stack_factor = factor;
  out.source_frames = seq.num_frames();
  // Row-major storage makes κ consecutive frames one contiguous block.
  const auto src = seq.frames.values();
  out.frames = matrix_f(n, factor * d,
                        std::vector<float>(src.begin(), src.begin() + n * factor * d));
  return out;
}

linear_adapter init_adapter(std::size_t input_dim, std::size_t hidden_dim,
                            std::uint64_t seed) {
  if (input_dim == 0 || hidden_dim == 0) {
    throw argument_error("init_adapter: dimensions must be positive");
  }
  rng gen(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  linear_adapter a;
  a.weight = matrix_d(input_dim, hidden_dim);
  for (double &w : a.weight.values()) w = dist(gen);
  a.bias.resize(hidden_dim);
  for (double &b : a.bias) b = dist(gen);
  return a;
}

matrix_d project(const matrix_f &frames, const linear_adapter &adapter) {
  if (frames.cols() != adapter.input_dim() ||
      adapter.bias.size() != adapter.hidden_dim()) {
    throw argument_error("project: frames have width " +
                         std::to_string(frames.cols()) + ", adapter expects " +
                         std::to_string(adapter.input_dim()));
  }
  const std::size_t h = adapter.hidden_dim();
  matrix_d out(frames.rows(), h);
  for (std::size_t n = 0; n < frames.rows(); ++n) {
    auto dst = out.row(n);
    std::copy(adapter.bias.begin(), adapter.bias.end(), dst.begin());
    const auto x = frames.row(n);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      const auto w = adapter.weight.row(i);
      for (std::size_t j = 0; j < h; ++j) dst[j] += xi * w[j];
    }
  }
  return out;
}

matrix_d project(const stacked_sequence &seq, const linear_adapter &adapter) {
  return project(seq.frames, adapter);
}

namespace {

feature_sequence as_sequence(const matrix_d &m, const std::string &name) {
  feature_sequence seq;
  seq.frames = matrix_f(m.rows(), m.cols());
  std::transform(m.values().begin(), m.values().end(), seq.frames.values().begin(),
                 [](double v) { return static_cast<float>(v); });
  seq.rate = {1, 1};
  seq.source_id = name;
  return seq;
}

matrix_d widen(const matrix_f &m) {
  matrix_d out(m.rows(), m.cols());
  std::copy(m.values().begin(), m.values().end(), out.values().begin());
  return out;
}

std::filesystem::path with_suffix(const std::filesystem::path &prefix,
                                  const char *suffix) {
  return prefix.string() + suffix;
}

}  // namespace

void store_adapter(const linear_adapter &adapter,
                   const std::filesystem::path &prefix) {
  store_features(as_sequence(adapter.weight, "adapter.weight"),
                 with_suffix(prefix, ".weight.srf"));
  store_features(as_sequence(matrix_d(1, adapter.bias.size(), adapter.bias),
                             "adapter.bias"),
                 with_suffix(prefix, ".bias.srf"));
}

linear_adapter load_adapter(const std::filesystem::path &prefix) {
  const auto w = load_features(with_suffix(prefix, ".weight.srf"));
  const auto b = load_features(with_suffix(prefix, ".bias.srf"));
  if (b.num_frames() != 1 || b.dim() != w.dim()) {
    throw validation_error("adapter " + prefix.string() +
                           ": bias shape does not match weight");
  }
  linear_adapter a;
  a.weight = widen(w.frames);
  a.bias.assign(b.frames.values().begin(), b.frames.values().end());
  return a;
}

}  // namespace reprbench
