#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace reprbench {

using rng = std::mt19937_64;

/// Derives a component seed from the run seed: splitmix64(seed) mixed with
/// the FNV-1a hash of the component name. Every random consumer in the tool
/// takes its seed from here so a single top-level seed pins a whole run.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view component);

/// Samples ranks 0..n-1 with probability proportional to 1 / (rank + 1)^s.
class zipf_sampler {
 public:
  zipf_sampler(std::size_t n, double exponent);

  std::size_t operator()(rng &gen) { return dist_(gen); }
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::discrete_distribution<std::size_t> dist_;
};

/// Draws `length` ids from a Zipf(s) law over `vocab` ids.
std::vector<std::uint32_t> zipf_sequence(std::size_t length, std::size_t vocab,
                                         double exponent, rng &gen);

}  // namespace reprbench
