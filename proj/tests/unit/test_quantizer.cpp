#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "reprbench/feature_io.hpp"
#include "reprbench/quantizer.hpp"
#include "reprbench/random.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace reprbench;

namespace {

std::vector<oracle::vec> rows_of(const matrix_f &m) {
  std::vector<oracle::vec> out;
  for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
  return out;
}

matrix_f random_frames(std::size_t n, std::size_t d, std::uint64_t seed) {
  rng gen(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  matrix_f m(n, d);
  for (auto &v : m.values()) v = dist(gen);
  return m;
}

bool non_increasing(const std::vector<double> &trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i] > trace[i - 1]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("four distinct points with k=4") {
  matrix_f pts(4, 2, std::vector<float>{0, 0, 1, 0, 0, 1, 5, 5});
  const auto r = train_kmeans(pts, {.k = 4, .seed = 1});
  CHECK(r.model.trained_inertia == 0.0);
  std::set<std::vector<float>> got, want;
  for (std::size_t i = 0; i < 4; ++i) {
    got.emplace(r.model.centroids.row(i).begin(), r.model.centroids.row(i).end());
    want.emplace(pts.row(i).begin(), pts.row(i).end());
  }
  CHECK(got == want);
}

TEST_CASE("identical points with k=1") {
  matrix_f pts(10, 3, 0.25f);
  const auto r = train_kmeans(pts, {.k = 1, .seed = 3});
  CHECK(r.model.trained_inertia == 0.0);
  CHECK(r.model.centroids(0, 2) == 0.25f);
}

TEST_CASE("k above the frame count is an argument error") {
  CHECK_THROWS_AS(train_kmeans(matrix_f(3, 2, 0.0f), {.k = 4}), argument_error);
  CHECK_THROWS_AS(train_kmeans(matrix_f(0, 2), {.k = 1}), argument_error);
}

TEST_CASE("centroids recover generator modes") {
  synth_spec spec{.frames = 200, .dim = 8, .modes = 4, .noise = 0.02, .seed = 17};
  const auto data = synth_structured_features(spec);
  const auto r = train_kmeans(data.sequence.frames, {.k = 4, .seed = 5});
  const auto centers = rows_of(data.centers);
  std::set<std::size_t> matched;
  for (const auto &c : rows_of(r.model.centroids)) {
    const auto m = oracle::nearest(c, centers);
    double d2 = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) d2 += (c[j] - centers[m][j]) * (c[j] - centers[m][j]);
    CHECK(std::sqrt(d2) < 0.1);
    matched.insert(m);
  }
  CHECK(matched.size() == 4);
}

TEST_CASE("noisy modes: k=4 inertia far below k=1") {
  const auto seq = synth_features(1000, 8, 4, 0.05, 7);
  const double k1 = train_kmeans(seq.frames, {.k = 1, .seed = 1}).model.trained_inertia;
  // k=1 optimum is the mean; compare against the brute-force mean as well
  std::vector<double> mean(8, 0.0);
  for (std::size_t r = 0; r < seq.num_frames(); ++r)
    for (std::size_t j = 0; j < 8; ++j) mean[j] += seq.frames(r, j) / 1000.0;
  const double brute = oracle::inertia(rows_of(seq.frames), {mean});
  CHECK(k1 == doctest::Approx(brute).epsilon(1e-9));
  const double k4 = train_kmeans(seq.frames, {.k = 4, .seed = 1}).model.trained_inertia;
  CHECK(k1 / k4 > 10.0);
}

TEST_CASE("quantize agrees with brute force and ties go low") {
  const auto frames = random_frames(50, 5, 9);
  codebook cb;
  cb.centroids = random_frames(7, 5, 10);
  feature_sequence seq;
  seq.frames = frames;
  const auto ids = quantize(seq, cb).ids;
  const auto cents = rows_of(cb.centroids);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    CHECK(ids[i] == oracle::nearest(rows_of(frames)[i], cents));
  }

  codebook dup;
  dup.centroids = matrix_f(3, 1, std::vector<float>{1.0f, -1.0f, 1.0f});
  feature_sequence zero;
  zero.frames = matrix_f(2, 1, std::vector<float>{0.0f, 1.0f});
  CHECK(quantize(zero, dup).ids == std::vector<std::uint32_t>{0, 0});

  feature_sequence empty;
  empty.frames = matrix_f(0, 5);
  CHECK(quantize(empty, cb).ids.empty());
  feature_sequence exact;
  exact.frames = matrix_f(1, 5);
  std::copy(cb.centroids.row(3).begin(), cb.centroids.row(3).end(), exact.frames.row(0).begin());
  CHECK(quantize(exact, cb).ids == std::vector<std::uint32_t>{3});

  feature_sequence wrong;
  wrong.frames = matrix_f(1, 4);
  CHECK_THROWS_AS(quantize(wrong, cb), argument_error);
}

TEST_CASE("quantize is permutation equivariant") {
  const auto frames = random_frames(40, 3, 21);
  codebook cb;
  cb.centroids = random_frames(6, 3, 22);
  std::vector<std::size_t> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  rng gen(5);
  std::shuffle(perm.begin(), perm.end(), gen);
  feature_sequence a, b;
  a.frames = frames;
  b.frames = matrix_f(0, 3);
  for (const auto p : perm) b.frames.append_row(frames.row(p));
  const auto ia = quantize(a, cb).ids;
  const auto ib = quantize(b, cb).ids;
  for (std::size_t i = 0; i < perm.size(); ++i) CHECK(ib[i] == ia[perm[i]]);
}

TEST_CASE("inertia examples and oracle") {
  codebook cb;
  cb.centroids = matrix_f(2, 2, std::vector<float>{0, 0, 10, 10});
  CHECK(inertia(matrix_f(3, 2, std::vector<float>{0, 0, 10, 10, 0, 0}), cb) == 0.0);
  CHECK(inertia(matrix_f(1, 2, std::vector<float>{2, 0}), cb) == 4.0);

  const auto frames = random_frames(60, 4, 31);
  cb.centroids = random_frames(5, 4, 32);
  const double want = oracle::inertia(rows_of(frames), rows_of(cb.centroids));
  CHECK(inertia(frames, cb) == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("training invariants over many seeds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto frames = random_frames(120, 3, 1000 + seed);
    const auto r = train_kmeans(frames, {.k = 6, .seed = seed});
    CHECK(non_increasing(r.inertia_trace));
    CHECK(r.model.trained_inertia == doctest::Approx(inertia(frames, r.model)).epsilon(1e-9));
    std::set<std::vector<float>> distinct;
    for (std::size_t i = 0; i < r.model.k(); ++i)
      distinct.emplace(r.model.centroids.row(i).begin(), r.model.centroids.row(i).end());
    CHECK(distinct.size() == 6);
  }
}

TEST_CASE("deterministic for a fixed seed, stride subsamples") {
  const auto frames = random_frames(300, 4, 77);
  const auto a = train_kmeans(frames, {.k = 8, .seed = 4});
  const auto b = train_kmeans(frames, {.k = 8, .seed = 4});
  CHECK(encode_codebook(a.model) == encode_codebook(b.model));
  CHECK(a.inertia_trace == b.inertia_trace);
  const auto strided = train_kmeans(frames, {.k = 8, .seed = 4, .frame_stride = 3});
  CHECK(strided.model.k() == 8);
  CHECK_THROWS_AS(train_kmeans(frames, {.k = 8, .frame_stride = 0}), argument_error);
}

TEST_CASE("duplicate-heavy data still covers every cluster") {
  // 6 distinct points, most of the mass on the origin; k = 6 must find all of them
  std::vector<float> v;
  for (int i = 0; i < 95; ++i) v.insert(v.end(), {0.0f, 0.0f});
  v.insert(v.end(), {1, 0, 0, 1, 1, 1, 2, 2, 3, 3});
  const matrix_f pts(100, 2, v);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = train_kmeans(pts, {.k = 6, .seed = seed});
    CHECK(r.model.trained_inertia == 0.0);
  }
}

TEST_CASE("codebook file round trip") {
  testing::temp_dir dir("cb");
  const auto r = train_kmeans(random_frames(50, 3, 8), {.k = 4, .seed = 2});
  auto cb = r.model;
  cb.meta["layer_id"] = "12";
  cb.meta["model"] = "synthetic";
  store_codebook(cb, dir / "c.scb");
  const auto back = load_codebook(dir / "c.scb");
  CHECK(back == cb);
  CHECK(encode_codebook(back) == encode_codebook(cb));

  auto bytes = encode_codebook(cb);
  bytes[0] = 'X';
  CHECK_THROWS_AS(decode_codebook(bytes), format_error);
  bytes = encode_codebook(cb);
  bytes.resize(20);
  CHECK_THROWS_AS(decode_codebook(bytes), corruption_error);
}

TEST_CASE("stage names") {
  CHECK(parse_token_stage("dedup") == token_stage::dedup);
  CHECK(std::string(to_string(token_stage::bpe)) == "bpe");
  CHECK_THROWS_AS(parse_token_stage("other"), format_error);
}
