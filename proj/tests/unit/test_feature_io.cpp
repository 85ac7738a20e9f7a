#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>

#include "reprbench/feature_io.hpp"
#include "reprbench/random.hpp"
#include "support/temp_dir.hpp"

using namespace reprbench;

namespace {

std::vector<std::uint8_t> header(std::uint32_t t, std::uint32_t d, std::uint32_t layer = 0) {
  std::vector<std::uint8_t> b = {'S', 'R', 'F', '1'};
  for (const std::uint32_t v : {1u, t, d, layer, 50u, 1u}) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  return b;
}

void put_float(std::vector<std::uint8_t> &b, float f) {
  const auto u = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

feature_sequence random_sequence(std::size_t t, std::size_t d, std::uint64_t seed) {
  rng gen(seed);
  std::normal_distribution<float> dist;
  feature_sequence s;
  s.frames = matrix_f(t, d);
  for (auto &v : s.frames.values()) v = dist(gen);
  s.layer_id = static_cast<std::uint32_t>(seed % 25);
  s.rate = {50, 1};
  return s;
}

}  // namespace

TEST_CASE("hand-written SRF1 payload decodes") {
  auto bytes = header(1, 3, 7);
  // 1.0f = 0x3f800000, 2.0f = 0x40000000, 3.0f = 0x40400000, little endian
  const std::uint8_t payload[] = {0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0x40,
                                  0x00, 0x00, 0x40, 0x40};
  bytes.insert(bytes.end(), std::begin(payload), std::end(payload));
  const auto seq = decode_features(bytes, "u1");
  CHECK(seq.num_frames() == 1);
  CHECK(seq.dim() == 3);
  CHECK(seq.layer_id == 7);
  CHECK(seq.source_id == "u1");
  CHECK(seq.frames(0, 0) == 1.0f);
  CHECK(seq.frames(0, 1) == 2.0f);
  CHECK(seq.frames(0, 2) == 3.0f);
}

TEST_CASE("empty payload keeps the width") {
  const auto seq = decode_features(header(0, 1024));
  CHECK(seq.num_frames() == 0);
  CHECK(seq.dim() == 1024);
}

TEST_CASE("encoded sizes follow the header layout") {
  feature_sequence empty;
  empty.frames = matrix_f(0, 4);
  CHECK(encode_features(empty).size() == srf1_header_bytes);
  CHECK(encode_features(random_sequence(2, 2, 1)).size() == srf1_header_bytes + 16);
}

TEST_CASE("store and load round trip over random shapes") {
  testing::temp_dir dir("fio");
  rng gen(42);
  for (int i = 0; i < 20; ++i) {
    const std::size_t t = gen() % 30;
    const std::size_t d = 1 + gen() % 9;
    auto seq = random_sequence(t, d, 100 + i);
    seq.rate = {static_cast<std::uint32_t>(1 + gen() % 100), static_cast<std::uint32_t>(1 + gen() % 3)};
    const auto path = dir / ("utt" + std::to_string(i) + ".srf");
    store_features(seq, path);
    const auto back = load_features(path);
    seq.source_id = "utt" + std::to_string(i);
    CHECK(back == seq);
  }
}

TEST_CASE("every single-byte corruption of the magic is rejected") {
  auto good = encode_features(random_sequence(3, 2, 5));
  for (std::size_t pos = 0; pos < 4; ++pos) {
    for (const std::uint8_t v : {0x00, 0x01, 0x20, 0x31, 0x52, 0x7f, 0x80, 0xff}) {
      if (v == good[pos]) continue;
      auto bad = good;
      bad[pos] = v;
      CHECK_THROWS_AS(decode_features(bad), format_error);
    }
  }
}

TEST_CASE("truncated and oversized payloads are corruption") {
  const auto good = encode_features(random_sequence(3, 2, 5));
  auto shorter = good;
  shorter.pop_back();
  CHECK_THROWS_AS(decode_features(shorter), corruption_error);
  auto longer = good;
  longer.push_back(0);
  CHECK_THROWS_AS(decode_features(longer), corruption_error);
  const std::vector<std::uint8_t> stub(good.begin(), good.begin() + 10);
  CHECK_THROWS_AS(decode_features(stub), corruption_error);
}

TEST_CASE("unknown version is a format error") {
  auto bytes = encode_features(random_sequence(1, 1, 5));
  bytes[4] = 2;
  CHECK_THROWS_AS(decode_features(bytes), format_error);
}

TEST_CASE("non-finite values name frame and column") {
  auto bytes = header(2, 3);
  for (int i = 0; i < 6; ++i) put_float(bytes, i == 4 ? std::numeric_limits<float>::quiet_NaN() : 0.5f);
  try {
    decode_features(bytes);
    FAIL("expected validation error");
  } catch (const validation_error &e) {
    const std::string msg = e.what();
    CHECK(msg.find("frame 1") != std::string::npos);
    CHECK(msg.find("column 1") != std::string::npos);
  }
}

TEST_CASE("load errors carry the path") {
  testing::temp_dir dir("fio");
  const auto path = dir / "broken.srf";
  std::ofstream(path, std::ios::binary) << "SRFX";
  try {
    load_features(path);
    FAIL("expected error");
  } catch (const error &e) {
    CHECK(std::string(e.what()).find("broken.srf") != std::string::npos);
  }
  CHECK_THROWS_AS(load_features(dir / "missing.srf"), io_error);
}

TEST_CASE("synthetic generator") {
  SUBCASE("zero noise collapses onto the centers") {
    const auto seq = synth_features(100, 8, 4, 0.0, 7);
    std::set<std::vector<float>> distinct;
    for (std::size_t r = 0; r < seq.num_frames(); ++r) {
      const auto row = seq.frames.row(r);
      distinct.emplace(row.begin(), row.end());
    }
    CHECK(distinct.size() == 4);
  }
  SUBCASE("deterministic") {
    CHECK(synth_features(50, 3, 2, 0.1, 9) == synth_features(50, 3, 2, 0.1, 9));
    CHECK_FALSE(synth_features(50, 3, 2, 0.1, 9) == synth_features(50, 3, 2, 0.1, 10));
  }
  SUBCASE("runs follow the requested mean length") {
    synth_spec spec{.frames = 20000, .dim = 2, .modes = 8, .noise = 0.0, .seed = 3,
                    .zipf_exponent = 1.0, .mean_run_length = 4.0};
    const auto r = synth_structured_features(spec);
    std::size_t runs = 1;
    for (std::size_t i = 1; i < r.modes.size(); ++i) runs += r.modes[i] != r.modes[i - 1];
    const double mean = static_cast<double>(r.modes.size()) / static_cast<double>(runs);
    // adjacent runs may draw the same mode, so the observed mean only grows
    CHECK(mean > 3.5);
    CHECK(mean < 6.0);
  }
}

TEST_CASE("manifest parsing") {
  const auto m = parse_manifest("a\tx/a.srf\thello world\tyes\nb\t/abs/b.srf\n\nc\tc.srf\t\tno\n",
                                "/data");
  REQUIRE(m.entries.size() == 3);
  CHECK(m.entries[0].path == std::filesystem::path("/data/x/a.srf"));
  CHECK(m.entries[0].transcript == "hello world");
  CHECK(m.entries[0].label == "yes");
  CHECK(m.entries[1].path == std::filesystem::path("/abs/b.srf"));
  CHECK_FALSE(m.entries[1].transcript.has_value());
  CHECK_FALSE(m.entries[2].transcript.has_value());
  CHECK(m.entries[2].label == "no");
  CHECK(m.find("b") == &m.entries[1]);
  CHECK(m.find("zz") == nullptr);

  CHECK_THROWS_AS(parse_manifest("a\tx.srf\na\ty.srf\n"), validation_error);
  CHECK_THROWS_AS(parse_manifest("only-one-field\n"), format_error);
}

TEST_CASE("manifest round trip and load_all uses manifest ids") {
  testing::temp_dir dir("fio");
  auto seq = random_sequence(4, 3, 11);
  store_features(seq, dir / "file.srf");
  manifest m;
  m.entries.push_back({"utt-7", dir / "file.srf", "some text", std::nullopt});
  store_manifest(m, dir / "m.tsv");
  const auto back = load_manifest(dir / "m.tsv");
  CHECK(back.entries == m.entries);
  const auto all = load_all(back);
  REQUIRE(all.size() == 1);
  CHECK(all[0].source_id == "utt-7");
  CHECK(all[0].frames == seq.frames);
}
