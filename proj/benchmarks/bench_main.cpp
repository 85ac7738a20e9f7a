#include <benchmark/benchmark.h>

#include "reprbench/metrics.hpp"
#include "reprbench/quantizer.hpp"
#include "reprbench/random.hpp"
#include "reprbench/tokenpipe.hpp"

using namespace reprbench;

namespace {

matrix_f random_frames(std::size_t n, std::size_t d, std::uint64_t seed) {
  rng gen(seed);
  std::normal_distribution<float> dist;
  matrix_f m(n, d);
  for (auto &v : m.values()) v = dist(gen);
  return m;
}

std::vector<token_sequence> zipf_corpus(std::size_t utterances, std::size_t length, std::size_t vocab) {
  rng gen(3);
  std::vector<token_sequence> out;
  for (std::size_t i = 0; i < utterances; ++i) {
    token_sequence t{zipf_sequence(length, vocab, 1.0, gen), token_stage::raw, "u" + std::to_string(i)};
    out.push_back(deduplicate(t));
  }
  return out;
}

// nearest-centroid assignment, frames x k
void bm_kmeans_assign(benchmark::State &state) {
  const auto frames = random_frames(static_cast<std::size_t>(state.range(0)), 64, 1);
  const auto cents = random_frames(static_cast<std::size_t>(state.range(1)), 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(assign(frames, cents));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_kmeans_assign)->Args({4096, 64})->Args({4096, 512})->Unit(benchmark::kMillisecond);

void bm_kmeans_train(benchmark::State &state) {
  const auto frames = random_frames(4096, 32, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(train_kmeans(frames, {.k = static_cast<std::size_t>(state.range(0)), .max_iters = 20}));
}
BENCHMARK(bm_kmeans_train)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void bm_bpe_train(benchmark::State &state) {
  const auto corpus = zipf_corpus(200, 500, 256);
  const auto target = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train_bpe(corpus, 256, target));
}
BENCHMARK(bm_bpe_train)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void bm_bpe_encode(benchmark::State &state) {
  const auto corpus = zipf_corpus(200, 500, 256);
  const bpe_codec codec(train_bpe(corpus, 256, 2048));
  std::size_t tokens = 0;
  for (const auto &t : corpus) tokens += t.size();
  for (auto _ : state)
    for (const auto &t : corpus) benchmark::DoNotOptimize(codec.encode(t.ids));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tokens));
}
BENCHMARK(bm_bpe_encode)->Unit(benchmark::kMillisecond);

void bm_edit_distance(benchmark::State &state) {
  rng gen(9);
  const auto n = static_cast<std::size_t>(state.range(0));
  word_seq ref(n), hyp(n);
  for (auto &w : ref) w = std::to_string(gen() % 50);
  for (auto &w : hyp) w = std::to_string(gen() % 50);
  for (auto _ : state) benchmark::DoNotOptimize(align(ref, hyp));
}
BENCHMARK(bm_edit_distance)->Arg(32)->Arg(256)->Arg(1024);

}  // namespace
BENCHMARK_MAIN();
