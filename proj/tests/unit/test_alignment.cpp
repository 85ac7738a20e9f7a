#include <doctest.h>

#include "reprbench/probe.hpp"
#include "reprbench/random.hpp"
#include "support/oracles.hpp"

using namespace reprbench;

namespace {

matrix_f random_matrix(std::size_t n, std::size_t d, rng &gen) {
  std::normal_distribution<float> dist;
  matrix_f m(n, d);
  for (auto &v : m.values()) v = dist(gen);
  return m;
}

std::vector<oracle::vec> rows_of(const matrix_f &m) {
  std::vector<oracle::vec> out;
  for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
  return out;
}

}  // namespace

TEST_CASE("identical sets give one, orthogonal sets zero") {
  rng gen(1);
  std::map<std::uint32_t, matrix_f> s;
  for (std::uint32_t layer = 0; layer < 4; ++layer) s.emplace(layer, random_matrix(6, 5, gen));
  for (const auto &r : alignment_similarity(s, s)) CHECK(r.similarity == doctest::Approx(1.0).epsilon(1e-12));

  std::map<std::uint32_t, matrix_f> a, b;
  a.emplace(0, matrix_f(2, 4, std::vector<float>{1, 0, 0, 0, 0, 1, 0, 0}));
  b.emplace(0, matrix_f(2, 4, std::vector<float>{0, 0, 1, 0, 0, 0, 0, 1}));
  CHECK(alignment_similarity(a, b)[0].similarity == 0.0);
}

TEST_CASE("random sets match the double loop") {
  rng gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::map<std::uint32_t, matrix_f> s, t;
    s.emplace(9, random_matrix(3, 6, gen));
    t.emplace(9, random_matrix(4, 6, gen));
    const double want = oracle::mean_max_cosine(rows_of(s.at(9)), rows_of(t.at(9)));
    const auto got = alignment_similarity(s, t);
    REQUIRE(got.size() == 1);
    CHECK(std::abs(got[0].similarity - want) < 1e-9);
    CHECK(got[0].speech_vectors == 3);
  }
}

TEST_CASE("positive rescaling does not matter; zero vectors are excluded") {
  rng gen(3);
  std::map<std::uint32_t, matrix_f> s, t;
  s.emplace(1, random_matrix(5, 3, gen));
  t.emplace(1, random_matrix(5, 3, gen));
  const double base = alignment_similarity(s, t)[0].similarity;
  auto scaled = s;
  for (std::size_t j = 0; j < 3; ++j) scaled.at(1)(2, j) *= 7.5f;
  CHECK(alignment_similarity(scaled, t)[0].similarity == doctest::Approx(base).epsilon(1e-9));

  auto with_zero = s;
  with_zero.at(1).append_row(std::vector<float>(3, 0.0f));
  const auto r = alignment_similarity(with_zero, t)[0];
  CHECK(r.excluded_zero == 1);
  CHECK(r.speech_vectors == 5);
  CHECK(r.similarity == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("mismatches are argument errors") {
  std::map<std::uint32_t, matrix_f> a, b, c;
  a.emplace(0, matrix_f(1, 3, 1.0f));
  b.emplace(0, matrix_f(1, 4, 1.0f));
  c.emplace(1, matrix_f(1, 3, 1.0f));
  CHECK_THROWS_AS(alignment_similarity(a, b), argument_error);
  CHECK_THROWS_AS(alignment_similarity(a, c), argument_error);
  CHECK(format_alignment(alignment_similarity(a, a)).rfind("layer\tsimilarity", 0) == 0);
}
