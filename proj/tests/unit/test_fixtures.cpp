#include <doctest.h>

#include <nlohmann/json.hpp>

#include "reprbench/feature_io.hpp"
#include "reprbench/probe.hpp"
#include "support/corpus.hpp"

using namespace reprbench;

#ifndef REPRBENCH_FIXTURE_DIR
#error "REPRBENCH_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace {

const std::filesystem::path fixtures = std::filesystem::path(REPRBENCH_FIXTURE_DIR) / "srf1";

}  // namespace

TEST_CASE("golden SRF1 files written outside this codebase load") {
  const auto expected = nlohmann::json::parse(testing::slurp(fixtures / "expected.json"));
  for (const auto &[name, want] : expected.items()) {
    CAPTURE(name);
    const auto seq = load_features(fixtures / (name + ".srf"));
    CHECK(seq.layer_id == want["layer_id"].get<std::uint32_t>());
    CHECK(seq.rate.numerator == want["rate"][0].get<std::uint32_t>());
    CHECK(seq.rate.denominator == want["rate"][1].get<std::uint32_t>());
    const auto &rows = want["frames"];
    REQUIRE(seq.num_frames() == rows.size());
    if (want.contains("dim")) CHECK(seq.dim() == want["dim"].get<std::size_t>());
    for (std::size_t t = 0; t < rows.size(); ++t)
      for (std::size_t j = 0; j < rows[t].size(); ++j) CHECK(seq.frames(t, j) == rows[t][j].get<float>());
  }
}

TEST_CASE("golden manifest resolves relative paths") {
  const auto m = load_manifest(fixtures / "manifest.tsv");
  REQUIRE(m.entries.size() == 3);
  CHECK(m.entries[0].transcript == "hello world");
  CHECK(m.entries[0].label == "greeting");
  CHECK_FALSE(m.entries[1].transcript.has_value());
  const auto all = load_all(m);
  CHECK(all[1].dim() == 1024);
  CHECK(all[2].rate.hz() == 25.0);
}

TEST_CASE("golden broken files are rejected with the right error") {
  CHECK_THROWS_AS(load_features(fixtures / "bad_magic.srf"), format_error);
  CHECK_THROWS_AS(load_features(fixtures / "truncated.srf"), corruption_error);
  CHECK_THROWS_AS(load_features(fixtures / "nan.srf"), validation_error);
}

TEST_CASE("identical exported layer stacks align flat at one") {
  auto by_layer = [](const std::filesystem::path &path) {
    std::map<std::uint32_t, matrix_f> out;
    for (const auto &seq : load_all(load_manifest(path))) out.emplace(seq.layer_id, seq.frames);
    return out;
  };
  const auto curve = alignment_similarity(by_layer(fixtures / "speech.tsv"), by_layer(fixtures / "text.tsv"));
  REQUIRE(curve.size() == 3);
  for (const auto &r : curve) CHECK(r.similarity == doctest::Approx(1.0).epsilon(1e-12));
}
