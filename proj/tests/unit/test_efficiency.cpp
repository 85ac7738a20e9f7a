#include <doctest.h>

#include <cmath>
#include <set>

#include "reprbench/efficiency.hpp"
#include "reprbench/random.hpp"
#include "reprbench/tokenpipe.hpp"

using namespace reprbench;

namespace {

std::vector<token_sequence> corpus_of(std::vector<std::vector<std::uint32_t>> seqs) {
  std::vector<token_sequence> out;
  for (auto &s : seqs) out.push_back({std::move(s), token_stage::raw, "u" + std::to_string(out.size())});
  return out;
}

std::vector<token_sequence> zipf_corpus(std::size_t vocab, std::uint64_t seed) {
  rng gen(seed);
  std::vector<std::vector<std::uint32_t>> seqs;
  for (int i = 0; i < 50; ++i) seqs.push_back(zipf_sequence(400, vocab, 1.0, gen));
  return corpus_of(std::move(seqs));
}

}  // namespace

TEST_CASE("bit rate") {
  CHECK(bit_rate({2, 1, 1.0, bit_mode::exact_log2}) == 1.0);
  CHECK(bit_rate({6000, 1, 50.0, bit_mode::integer_width}) == 650.0);
  // log2(6000) * 50, evaluated independently
  CHECK(bit_rate({6000, 1, 50.0, bit_mode::exact_log2}) == doctest::Approx(627.5373392691622).epsilon(1e-12));
  CHECK(code_width_bits(6000) == 13);
  CHECK(code_width_bits(2000) == 11);
  CHECK(code_width_bits(2048) == 11);
  CHECK(code_width_bits(2049) == 12);
  CHECK_THROWS_AS(bit_rate({1, 1, 50.0}), argument_error);
  CHECK_THROWS_AS(bit_rate({10, 0, 50.0}), argument_error);
  CHECK_THROWS_AS(bit_rate({10, 1, 0.0}), argument_error);

  for (std::uint64_t v = 2; v < 200; v += 7) {
    CHECK(bit_rate({v + 1, 1, 25.0}) > bit_rate({v, 1, 25.0}));
    CHECK(bit_rate({v, 2, 25.0}) > bit_rate({v, 1, 25.0}));
    CHECK(bit_rate({v, 1, 25.5}) > bit_rate({v, 1, 25.0}));
  }
}

TEST_CASE("data size table") {
  const auto rows = data_size_table(1.0, continuous_stream{32, 1024, 25},
                                    {{"raw", 13, 50.0, std::nullopt},
                                     {"dedup", 13, std::nullopt, 0.6},
                                     {"bpe", 13, std::nullopt, 0.5}});
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].bits == 819200.0);
  CHECK_FALSE(rows[0].reduction_ratio.has_value());
  CHECK(rows[1].bits == 650.0);
  CHECK(*rows[1].reduction_ratio == doctest::Approx(0.00079345703125).epsilon(1e-12));
  CHECK(rows[2].codes == doctest::Approx(30.0));
  CHECK(*rows[3].reduction_ratio == doctest::Approx(0.5));
  double product = 1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) product *= *rows[i].reduction_ratio;
  CHECK(std::abs(product - rows.back().bits / rows.front().bits) <= 1e-9 * product);

  const auto single = data_size_table(1.0, std::nullopt, {{"raw", 13, 50.0, std::nullopt}});
  REQUIRE(single.size() == 1);
  CHECK_FALSE(single[0].reduction_ratio.has_value());
  CHECK(format_data_size_table(single) == "stage\tcodes\tbits\treduction_ratio\nraw\t50\t650\t\n");

  CHECK_THROWS_AS(data_size_table(1.0, std::nullopt, {}), argument_error);
  CHECK_THROWS_AS(data_size_table(0.0, std::nullopt, {{"raw", 13, 50.0, std::nullopt}}), argument_error);
}

TEST_CASE("frequency report") {
  SUBCASE("uniform over ten ids") {
    std::vector<std::uint32_t> ids;
    for (int r = 0; r < 10; ++r)
      for (std::uint32_t i = 0; i < 10; ++i) ids.push_back(i);
    const auto rep = make_frequency_report(corpus_of({ids}), 0.95);
    CHECK(rep.vocab() == 10);
    CHECK(rep.sorted_ids.front() == 0);
    CHECK(rep.sorted_ids.back() == 9);
    // cumulative reaches 0.95 only at the last rank, so nothing trails it
    CHECK(rep.under_trained.empty());
    const auto rep90 = make_frequency_report(corpus_of({ids}), 0.9);
    CHECK(rep90.under_trained == std::vector<std::uint32_t>{9});
  }
  SUBCASE("single head") {
    std::vector<std::uint32_t> ids(96, 3);
    ids.insert(ids.end(), {0, 1, 2, 4});
    const auto rep = make_frequency_report(corpus_of({ids}), 0.95, 6);
    CHECK(rep.under_trained == std::vector<std::uint32_t>{0, 1, 2, 4, 5});
    CHECK(rep.counts[5] == 0);
  }
  SUBCASE("zipf: deterministic, monotone, cumulative ends at one") {
    const auto corpus = zipf_corpus(6000, 7);
    const auto a = make_frequency_report(corpus, 0.95, 6000);
    const auto b = make_frequency_report(corpus, 0.95, 6000);
    CHECK(a.under_trained == b.under_trained);
    CHECK(std::abs(a.cumulative.back() - 1.0) <= 1e-12);
    for (std::size_t i = 1; i < a.cumulative.size(); ++i) CHECK(a.cumulative[i] >= a.cumulative[i - 1]);
    std::size_t previous = SIZE_MAX;
    for (const double th : {0.5, 0.7, 0.8, 0.9, 0.95, 0.99}) {
      const auto r = make_frequency_report(corpus, th, 6000);
      CHECK(r.under_trained.size() <= previous);
      previous = r.under_trained.size();
    }
  }
  CHECK_THROWS_AS(make_frequency_report({}, 0.95), argument_error);
  CHECK_THROWS_AS(make_frequency_report(corpus_of({{1}}), 1.5), argument_error);
  CHECK_THROWS_AS(make_frequency_report(corpus_of({{7}}), 0.9, 3), validation_error);
}

TEST_CASE("frequency tsv and summary") {
  const auto rep = make_frequency_report(corpus_of({{0, 0, 0, 1}}), 0.7, 3);
  CHECK(format_frequency_tsv(rep) ==
        "rank\tid\tcount\tfraction\tcumulative\tunder_trained\n"
        "1\t0\t3\t0.75\t0.75\t0\n"
        "2\t1\t1\t0.25\t1\t1\n"
        "3\t2\t0\t0\t1\t1\n");
  const auto j = frequency_summary(rep);
  CHECK(j["total"] == 4);
  CHECK(j["under_trained_count"] == 2);
}

TEST_CASE("prune") {
  codebook cb;
  cb.centroids = matrix_f(3, 1, std::vector<float>{0.0f, 10.0f, 1.0f});
  SUBCASE("three-id toy") {
    const auto corpus = corpus_of({{0, 1, 0, 1, 2, 0, 1}});
    const auto r = prune_under_trained(corpus, cb, 0.34);
    REQUIRE(r.remap.size() == 1);
    CHECK(r.remap[0] == std::pair<std::uint32_t, std::uint32_t>{2, 0});
    CHECK(r.corpus[0].ids == std::vector<std::uint32_t>{0, 1, 0, 1, 0, 0, 1});
  }
  SUBCASE("fraction too small to prune anything") {
    const auto corpus = corpus_of({{0, 1, 2}});
    const auto r = prune_under_trained(corpus, cb, 0.2);
    CHECK(r.remap.empty());
    CHECK(r.corpus == corpus);
  }
  SUBCASE("zipf corpus: no pruned id survives") {
    rng gen(4);
    codebook big;
    big.centroids = matrix_f(200, 4);
    std::normal_distribution<float> n;
    for (auto &v : big.centroids.values()) v = n(gen);
    std::vector<std::vector<std::uint32_t>> seqs;
    for (int i = 0; i < 20; ++i) seqs.push_back(zipf_sequence(300, 200, 1.0, gen));
    const auto r = prune_under_trained(corpus_of(seqs), big, 0.1);
    CHECK(r.remap.size() == 20);
    const auto rep = make_frequency_report(r.corpus, 0.95, 200);
    std::set<std::uint32_t> pruned;
    for (const auto &[from, to] : r.remap) {
      pruned.insert(from);
      CHECK(rep.counts[from] == 0);
    }
    for (const auto &[from, to] : r.remap) CHECK_FALSE(pruned.contains(to));
  }
  CHECK_THROWS_AS(prune_under_trained(corpus_of({{0}}), cb, 1.0), argument_error);
  std::vector<token_sequence> dedup{{{0, 1}, token_stage::dedup, "x"}};
  CHECK_THROWS_AS(prune_under_trained(dedup, cb, 0.5), state_error);
}
