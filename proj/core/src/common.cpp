#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>

#include "binary_io.hpp"
#include "reprbench/error.hpp"
#include "reprbench/random.hpp"

namespace reprbench {

const char *to_string(error_kind kind) noexcept {
  switch (kind) {
    case error_kind::format: return "format error";
    case error_kind::corruption: return "corruption error";
    case error_kind::validation: return "validation error";
    case error_kind::argument: return "argument error";
    case error_kind::state: return "state error";
    case error_kind::io: return "I/O error";
    case error_kind::config: return "config error";
    case error_kind::divergence: return "divergence error";
  }
  return "error";
}

void throw_error(error_kind kind, const std::string &message) {
  switch (kind) {
    case error_kind::format: throw format_error(message);
    case error_kind::corruption: throw corruption_error(message);
    case error_kind::validation: throw validation_error(message);
    case error_kind::argument: throw argument_error(message);
    case error_kind::state: throw state_error(message);
    case error_kind::io: throw io_error(message);
    case error_kind::config: throw config_error(message);
    case error_kind::divergence: throw divergence_error(message);
  }
  throw error(kind, message);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view component) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char c : component) {
    hash ^= static_cast<std::uint8_t>(c);
    hash *= 0x100000001b3ULL;
  }
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z ^ hash;
}

namespace {

std::vector<double> zipf_weights(std::size_t n, double exponent) {
  if (n == 0) {
    throw argument_error("zipf_sampler: empty support");
  }
  std::vector<double> w(n);
  for (std::size_t r = 0; r < n; ++r) {
    w[r] = 1.0 / std::pow(static_cast<double>(r + 1), exponent);
  }
  return w;
}

}  // namespace

zipf_sampler::zipf_sampler(std::size_t n, double exponent)
    : n_(n), dist_([&] {
        auto w = zipf_weights(n, exponent);
        return std::discrete_distribution<std::size_t>(w.begin(), w.end());
      }()) {}

std::vector<std::uint32_t> zipf_sequence(std::size_t length, std::size_t vocab,
                                         double exponent, rng &gen) {
  zipf_sampler sampler(vocab, exponent);
  std::vector<std::uint32_t> out(length);
  for (auto &id : out) {
    id = static_cast<std::uint32_t>(sampler(gen));
  }
  return out;
}

namespace detail {

std::vector<std::uint8_t> read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw io_error("read failed: " + path.string());
  }
  return bytes;
}

std::string read_text_file(const std::filesystem::path &path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

void write_file(const std::filesystem::path &path,
                std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw io_error("cannot open for writing: " + path.string());
  }
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw io_error("write failed: " + path.string());
  }
}

void write_text_file(const std::filesystem::path &path, std::string_view text) {
  write_file(path, {reinterpret_cast<const std::uint8_t *>(text.data()),
                    text.size()});
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw format_error("not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw format_error("not a non-negative integer: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace detail
}  // namespace reprbench
