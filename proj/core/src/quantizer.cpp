#include "reprbench/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "binary_io.hpp"
#include "parallel.hpp"
#include "reprbench/random.hpp"

namespace reprbench {

namespace {

constexpr std::size_t assign_block = 1024;
constexpr std::uint8_t scb1_magic[4] = {'S', 'C', 'B', '1'};
constexpr std::uint32_t scb1_version = 1;

struct assignment {
  std::vector<std::uint32_t> labels;
  std::vector<double> distances;  // squared distance to the assigned centroid
};

template <typename C>
std::pair<std::uint32_t, double> nearest(std::span<const float> x,
                                         const matrix<C> &centroids) {
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double dist = squared_distance(x, centroids.row(c));
    if (dist < best_d) {
      best_d = dist;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return {best, best_d};
}

template <typename C>
assignment assign_all(const matrix_f &frames, const matrix<C> &centroids) {
  assignment a;
  a.labels.resize(frames.rows());
  a.distances.resize(frames.rows());
  detail::for_blocks(frames.rows(), assign_block,
                     [&](std::size_t begin, std::size_t end, std::size_t) {
                       for (std::size_t i = begin; i < end; ++i) {
                         std::tie(a.labels[i], a.distances[i]) =
                             nearest(frames.row(i), centroids);
                       }
                     });
  return a;
}

double total(const std::vector<double> &distances) {
  // Block-wise partial sums keep the result independent of thread count.
  std::vector<double> partial(detail::block_count(distances.size(), assign_block), 0.0);
  detail::for_blocks(distances.size(), assign_block,
                     [&](std::size_t begin, std::size_t end, std::size_t b) {
                       double s = 0.0;
                       for (std::size_t i = begin; i < end; ++i) s += distances[i];
                       partial[b] = s;
                     });
  return std::accumulate(partial.begin(), partial.end(), 0.0);
}

void check_finite(const matrix_f &frames) {
  const auto v = frames.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw validation_error("k-means: non-finite value at frame " +
                             std::to_string(i / frames.cols()) + ", column " +
                             std::to_string(i % frames.cols()));
    }
  }
}

// k-means++: first center uniform, then D^2 sampling. Once every remaining
// frame coincides with a chosen center the rest are filled with the lowest
// unused frame indices.
matrix_d seed_plus_plus(const matrix_f &frames, std::size_t k, rng &gen) {
  const std::size_t n = frames.rows();
  matrix_d centers(k, frames.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<bool> used(n, false);

  auto take = [&](std::size_t c, std::size_t idx) {
    used[idx] = true;
    const auto src = frames.row(idx);
    std::copy(src.begin(), src.end(), centers.row(c).begin());
    detail::for_blocks(n, assign_block,
                       [&](std::size_t begin, std::size_t end, std::size_t) {
                         for (std::size_t i = begin; i < end; ++i) {
                           d2[i] = std::min(d2[i], squared_distance(frames.row(i),
                                                                    src));
                         }
                       });
  };

  take(0, std::uniform_int_distribution<std::size_t>(0, n - 1)(gen));
  for (std::size_t c = 1; c < k; ++c) {
    const double mass = total(d2);
    std::size_t pick = n;
    if (mass > 0.0) {
      const double target = std::uniform_real_distribution<double>(0.0, mass)(gen);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
    }
    if (pick == n) {
      pick = static_cast<std::size_t>(
          std::find(used.begin(), used.end(), false) - used.begin());
    }
    take(c, pick);
  }
  return centers;
}

// Moves each empty centroid onto the frame farthest from its own centroid,
// taken only from clusters with at least two members so no cluster empties.
std::size_t repair_empty(const matrix_f &frames, matrix_d &centroids,
                         assignment &a) {
  const std::size_t k = centroids.rows();
  std::vector<std::size_t> sizes(k, 0);
  for (const auto l : a.labels) ++sizes[l];
  std::size_t repaired = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] != 0) continue;
    std::size_t far = frames.rows();
    double far_d = 0.0;
    for (std::size_t i = 0; i < frames.rows(); ++i) {
      if (sizes[a.labels[i]] >= 2 && a.distances[i] > far_d) {
        far_d = a.distances[i];
        far = i;
      }
    }
    if (far == frames.rows()) break;  // fewer distinct frames than clusters
    const auto src = frames.row(far);
    std::copy(src.begin(), src.end(), centroids.row(c).begin());
    --sizes[a.labels[far]];
    ++sizes[c];
    a.labels[far] = static_cast<std::uint32_t>(c);
    a.distances[far] = 0.0;
    ++repaired;
  }
  return repaired;
}

void update_means(const matrix_f &frames, const assignment &a,
                  matrix_d &centroids) {
  const std::size_t k = centroids.rows();
  matrix_d sums(k, frames.cols(), 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < frames.rows(); ++i) {
    const auto l = a.labels[i];
    auto dst = sums.row(l);
    const auto src = frames.row(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    ++counts[l];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;  // keeps its position
    auto dst = centroids.row(c);
    const auto src = sums.row(c);
    for (std::size_t j = 0; j < dst.size(); ++j) {
      dst[j] = src[j] / static_cast<double>(counts[c]);
    }
  }
}

matrix_f subsample(const matrix_f &frames, std::size_t stride) {
  if (stride <= 1) return frames;
  matrix_f out(0, frames.cols());
  for (std::size_t i = 0; i < frames.rows(); i += stride) {
    out.append_row(frames.row(i));
  }
  return out;
}

}  // namespace

const char *to_string(token_stage stage) noexcept {
  switch (stage) {
    case token_stage::raw: return "raw";
    case token_stage::dedup: return "dedup";
    case token_stage::bpe: return "bpe";
  }
  return "raw";
}

token_stage parse_token_stage(std::string_view text) {
  if (text == "raw") return token_stage::raw;
  if (text == "dedup") return token_stage::dedup;
  if (text == "bpe") return token_stage::bpe;
  throw format_error("unknown token stage '" + std::string(text) + "'");
}

kmeans_result train_kmeans(const matrix_f &all_frames, const kmeans_options &opts) {
  if (opts.k == 0) {
    throw argument_error("k-means: k must be at least 1");
  }
  if (all_frames.cols() == 0) {
    throw argument_error("k-means: frames have zero dimension");
  }
  check_finite(all_frames);
  if (opts.frame_stride == 0) {
    throw argument_error("k-means: frame stride must be at least 1");
  }
  const matrix_f frames = subsample(all_frames, opts.frame_stride);
  if (frames.rows() == 0) {
    throw argument_error("k-means: no training frames");
  }
  if (opts.k > frames.rows()) {
    throw argument_error("k-means: k = " + std::to_string(opts.k) +
                         " exceeds the " + std::to_string(frames.rows()) +
                         " training frames");
  }

  rng gen(opts.seed);
  matrix_d centroids = seed_plus_plus(frames, opts.k, gen);

  kmeans_result result;
  matrix_d previous = centroids;
  for (std::size_t iter = 0; iter < std::max<std::size_t>(opts.max_iters, 1); ++iter) {
    assignment a = assign_all(frames, centroids);
    result.reseeds += repair_empty(frames, centroids, a);
    const double current = total(a.distances);
    ++result.iterations;

    if (!result.inertia_trace.empty()) {
      const double prev = result.inertia_trace.back();
      if (current > prev) {
        // Rounding in the mean update can nudge inertia up at convergence.
        centroids = previous;
        break;
      }
      result.inertia_trace.push_back(current);
      if (prev <= 0.0 || (prev - current) / prev < opts.tol) break;
    } else {
      result.inertia_trace.push_back(current);
      if (current <= 0.0) break;
    }
    if (iter + 1 >= opts.max_iters) break;
    previous = centroids;
    update_means(frames, a, centroids);
  }

  codebook &cb = result.model;
  cb.centroids = matrix_f(centroids.rows(), centroids.cols());
  std::transform(centroids.values().begin(), centroids.values().end(),
                 cb.centroids.values().begin(),
                 [](double v) { return static_cast<float>(v); });
  cb.trained_inertia = inertia(frames, cb);
  return result;
}

std::vector<std::uint32_t> assign(const matrix_f &frames, const matrix_f &centroids) {
  if (frames.cols() != centroids.cols()) {
    throw argument_error("dimension mismatch: frames have " +
                         std::to_string(frames.cols()) + " columns, codebook " +
                         std::to_string(centroids.cols()));
  }
  if (centroids.rows() == 0) {
    throw argument_error("empty codebook");
  }
  return assign_all(frames, centroids).labels;
}

token_sequence quantize(const feature_sequence &seq, const codebook &cb) {
  token_sequence out;
  out.stage = token_stage::raw;
  out.source_id = seq.source_id;
  out.ids = assign(seq.frames, cb.centroids);
  return out;
}

double inertia(const matrix_f &frames, const codebook &cb) {
  if (frames.cols() != cb.d()) {
    throw argument_error("dimension mismatch: frames have " +
                         std::to_string(frames.cols()) + " columns, codebook " +
                         std::to_string(cb.d()));
  }
  if (cb.k() == 0) {
    throw argument_error("empty codebook");
  }
  return total(assign_all(frames, cb.centroids).distances);
}

matrix_f pool_frames(const std::vector<feature_sequence> &sequences) {
  if (sequences.empty()) {
    throw argument_error("no feature sequences to pool");
  }
  const std::size_t d = sequences.front().dim();
  std::size_t rows = 0;
  for (const auto &s : sequences) {
    if (s.dim() != d) {
      throw argument_error("sequence '" + s.source_id + "' has dimension " +
                           std::to_string(s.dim()) + ", expected " +
                           std::to_string(d));
    }
    rows += s.num_frames();
  }
  std::vector<float> values;
  values.reserve(rows * d);
  for (const auto &s : sequences) {
    values.insert(values.end(), s.frames.values().begin(), s.frames.values().end());
  }
  return matrix_f(rows, d, std::move(values));
}

std::vector<std::uint8_t> encode_codebook(const codebook &cb) {
  std::vector<std::uint8_t> out;
  for (const auto b : scb1_magic) out.push_back(b);
  detail::put_u32(out, scb1_version);
  detail::put_u32(out, static_cast<std::uint32_t>(cb.k()));
  detail::put_u32(out, static_cast<std::uint32_t>(cb.d()));
  for (const float v : cb.centroids.values()) detail::put_f32(out, v);

  std::string meta;
  auto fields = cb.meta;
  fields["trained_inertia"] = detail::format_double(cb.trained_inertia);
  for (const auto &[key, value] : fields) {
    if (key.find_first_of("=\n") != std::string::npos ||
        value.find('\n') != std::string::npos) {
      throw argument_error("codebook metadata key/value contains '=' or newline");
    }
    meta += key + "=" + value + "\n";
  }
  detail::put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.insert(out.end(), meta.begin(), meta.end());
  return out;
}

codebook decode_codebook(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 ||
      !std::equal(std::begin(scb1_magic), std::end(scb1_magic), bytes.begin())) {
    throw format_error("SCB1: bad magic");
  }
  if (bytes.size() < 16) {
    throw corruption_error("SCB1: truncated header");
  }
  if (detail::get_u32(bytes, 4) != scb1_version) {
    throw format_error("SCB1: unsupported version");
  }
  const std::uint64_t k = detail::get_u32(bytes, 8);
  const std::uint64_t d = detail::get_u32(bytes, 12);
  const std::uint64_t meta_at = 16 + k * d * 4;
  if (bytes.size() < meta_at + 4) {
    throw corruption_error("SCB1: truncated centroid payload");
  }
  const std::uint64_t meta_len = detail::get_u32(bytes, meta_at);
  if (bytes.size() != meta_at + 4 + meta_len) {
    throw corruption_error("SCB1: metadata length does not match file size");
  }

  codebook cb;
  std::vector<float> values(k * d);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = detail::get_f32(bytes, 16 + 4 * i);
    if (!std::isfinite(values[i])) {
      throw validation_error("SCB1: non-finite centroid value at index " +
                             std::to_string(i));
    }
  }
  cb.centroids = matrix_f(k, d, std::move(values));
  const std::string_view meta(
      reinterpret_cast<const char *>(bytes.data() + meta_at + 4), meta_len);
  for (const auto line : detail::split(meta, '\n')) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw format_error("SCB1: metadata line without '='");
    }
    cb.meta.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  if (const auto it = cb.meta.find("trained_inertia"); it != cb.meta.end()) {
    cb.trained_inertia = detail::parse_double(it->second);
    cb.meta.erase(it);
  }
  return cb;
}

codebook load_codebook(const std::filesystem::path &path) {
  const auto bytes = detail::read_file(path);
  try {
    return decode_codebook(bytes);
  } catch (const error &e) {
    throw_error(e.kind(), path.string() + ": " + e.what());
  }
}

void store_codebook(const codebook &cb, const std::filesystem::path &path) {
  detail::write_file(path, encode_codebook(cb));
}

}  // namespace reprbench
