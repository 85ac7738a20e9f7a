#include <doctest.h>

#include <cmath>
#include <numeric>

#include "reprbench/probe.hpp"
#include "reprbench/random.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace reprbench;

namespace {

std::vector<std::string> ids_for(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("u" + std::to_string(i));
  return ids;
}

// Two Gaussian blobs along e1 with centres 4 sigma either side of zero.
probe_dataset blobs(std::size_t n, std::size_t dim, std::uint64_t seed,
                    std::vector<oracle::vec> *raw = nullptr, std::vector<int> *ys = nullptr) {
  rng gen(seed);
  std::normal_distribution<float> noise(0.0f, 1.0f);
  std::vector<matrix_f> feats;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    matrix_f f(1, dim);
    for (std::size_t j = 0; j < dim; ++j) f(0, j) = noise(gen);
    f(0, 0) += y ? 4.0f : -4.0f;
    if (raw) raw->emplace_back(f.row(0).begin(), f.row(0).end());
    if (ys) ys->push_back(y);
    feats.push_back(std::move(f));
    labels.push_back(y ? "pos" : "neg");
  }
  return make_continuous_dataset(ids_for(n), std::move(feats), labels);
}

probe_dataset random_labels(std::size_t n, std::size_t dim, std::uint64_t seed) {
  rng gen(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<matrix_f> feats;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    matrix_f f(3, dim);
    for (auto &v : f.values()) v = u(gen);
    feats.push_back(std::move(f));
    labels.push_back(std::string(1, static_cast<char>('a' + gen() % 4)));
  }
  return make_continuous_dataset(ids_for(n), std::move(feats), labels);
}

probe_dataset small_discrete(std::uint64_t seed) {
  rng gen(seed);
  std::vector<std::vector<std::uint32_t>> toks;
  std::vector<std::string> labels;
  for (int i = 0; i < 12; ++i) {
    std::vector<std::uint32_t> t(1 + gen() % 6);
    for (auto &x : t) x = static_cast<std::uint32_t>(gen() % 7);
    toks.push_back(t);
    labels.push_back(std::string(1, static_cast<char>('a' + i % 3)));
  }
  return make_discrete_dataset(ids_for(12), std::move(toks), labels, 7);
}

double max_relative_gradient_error(const probe_model &model, const probe_dataset &data, double l2) {
  std::vector<std::size_t> batch(data.size());
  std::iota(batch.begin(), batch.end(), 0);
  const auto analytic = probe_objective(model, data, batch, l2).gradient;
  auto params = flatten(model);
  double worst = 0.0;
  const double h = 1e-5;
  for (std::size_t i = 0; i < params.size(); ++i) {
    probe_model m = model;
    const double saved = params[i];
    params[i] = saved + h;
    unflatten(m, params);
    const double up = probe_objective(m, data, batch, l2).loss;
    params[i] = saved - h;
    unflatten(m, params);
    const double down = probe_objective(m, data, batch, l2).loss;
    params[i] = saved;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("datasets") {
  const auto d = small_discrete(1);
  CHECK(d.classes == std::vector<std::string>{"a", "b", "c"});
  CHECK(d.input_dim == 7);
  CHECK_THROWS_AS(make_discrete_dataset({"x"}, {{9}}, {"a"}, 7), validation_error);
  CHECK_THROWS_AS(make_discrete_dataset({"x", "y"}, {{1}}, {"a", "b"}, 7), argument_error);
  std::vector<matrix_f> mixed{matrix_f(1, 2), matrix_f(1, 3)};
  CHECK_THROWS_AS(make_continuous_dataset({"x", "y"}, mixed, {"a", "b"}), argument_error);
  CHECK(parse_probe_kind("discrete") == probe_kind::embedding_bag_discrete);
  CHECK(std::string(to_string(probe_kind::mean_pool_continuous)) == "continuous");
}

TEST_CASE("split is a seeded partition") {
  const auto s = make_split(100, 0.25, 5);
  CHECK(s.test.size() == 25);
  CHECK(s.train.size() == 75);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 100; ++i) CHECK(all[i] == i);
  CHECK(make_split(100, 0.25, 5).test == s.test);
  CHECK_FALSE(make_split(100, 0.25, 6).test == s.test);
}

TEST_CASE("gradient check") {
  probe_config cfg;
  cfg.hidden = 4;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    cfg.seed = seed;
    const auto cont = random_labels(10, 5, 40 + seed);
    CHECK(max_relative_gradient_error(init_probe(cont, cfg), cont, 1e-2) < 1e-4);
    const auto disc = small_discrete(seed);
    CHECK(max_relative_gradient_error(init_probe(disc, cfg), disc, 1e-2) < 1e-4);
  }
}

TEST_CASE("softmax outputs sum to one") {
  const auto data = random_labels(20, 4, 3);
  const auto model = init_probe(data, {});
  for (const auto &p : predict_proba(model, data)) {
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-9);
  }
}

TEST_CASE("separable blobs are learned") {
  std::vector<oracle::vec> raw;
  std::vector<int> ys;
  const auto data = blobs(200, 4, 11, &raw, &ys);
  REQUIRE(oracle::perceptron_separates(raw, ys));
  probe_config cfg;
  cfg.epochs = 200;
  cfg.seed = 2;
  const auto t = train_probe(data, cfg);
  CHECK(eval_probe(t.model, data) >= 0.99);
  for (std::size_t i = 1; i < t.loss_trace.size(); ++i) CHECK(t.loss_trace[i] <= t.loss_trace[i - 1]);
}

TEST_CASE("random labels stay near chance") {
  // P(outside [60, 140] of 400 | Binomial(400, 0.25)) is about 3.6e-6
  CHECK(oracle::binomial_outside(400, 0.25, 60, 140) < 1e-5);
  const auto data = random_labels(1600, 8, 12);
  const auto split = make_split(data.size(), 0.25, 9);
  probe_config cfg;
  cfg.epochs = 30;
  cfg.seed = 3;
  const auto t = train_probe(subset(data, split.train), cfg);
  const double acc = eval_probe(t.model, subset(data, split.test));
  CHECK(acc >= 0.15);
  CHECK(acc <= 0.35);
}

TEST_CASE("zero epochs returns the initialisation") {
  const auto data = blobs(20, 3, 1);
  probe_config cfg;
  cfg.epochs = 0;
  cfg.seed = 5;
  CHECK(train_probe(data, cfg).model == init_probe(data, cfg));
}

TEST_CASE("training is deterministic and validates input") {
  const auto data = small_discrete(4);
  probe_config cfg;
  cfg.epochs = 20;
  cfg.seed = 8;
  CHECK(train_probe(data, cfg).model == train_probe(data, cfg).model);

  const auto one_class = make_continuous_dataset({"a", "b"}, {matrix_f(1, 2), matrix_f(1, 2)}, {"x", "x"});
  CHECK_THROWS_AS(train_probe(one_class, cfg), argument_error);
}

TEST_CASE("huge learning rates end in divergence or recover") {
  const auto data = blobs(40, 3, 2);
  probe_config cfg;
  cfg.learning_rate = 1e300;
  cfg.epochs = 3;
  cfg.max_lr_halvings = 2;
  CHECK_THROWS_AS(train_probe(data, cfg), divergence_error);
  cfg.max_lr_halvings = 2000;
  const auto t = train_probe(data, cfg);
  CHECK(std::isfinite(t.loss_trace.back()));
  CHECK(t.lr_halvings > 0);
}

TEST_CASE("eval on hand-built model") {
  const auto data = make_continuous_dataset(
      {"x", "y", "z"}, {matrix_f(1, 2, std::vector<float>{1, 0}), matrix_f(1, 2, std::vector<float>{0, 1}),
                        matrix_f(1, 2, std::vector<float>{-1, 0})},
      {"p", "q", "q"});
  probe_config cfg;
  cfg.hidden = 2;
  auto m = init_probe(data, cfg);
  m.input_weight = matrix_d(2, 2, std::vector<double>{1, 0, 0, 1});
  m.input_bias = {0, 0};
  // logits: p = h0, q = h1
  m.classifier_weight = matrix_d(2, 2, std::vector<double>{1, 0, 0, 1});
  m.classifier_bias = {0, 0};
  // x -> (1,0) -> p; y -> (0,1) -> q; z -> (-1,0) -> q
  CHECK(predict(m, data) == std::vector<std::uint32_t>{0, 1, 1});
  CHECK(eval_probe(m, data) == 1.0);
  m.classifier_bias = {10, 0};
  CHECK(eval_probe(m, data) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("probe files round trip") {
  testing::temp_dir dir("probe");
  const auto data = small_discrete(6);
  probe_config cfg;
  cfg.epochs = 5;
  const auto m = train_probe(data, cfg).model;
  store_probe(m, dir / "p");
  const auto back = load_probe(dir / "p");
  CHECK(back.classes == m.classes);
  CHECK(back.kind == m.kind);
  CHECK(predict(back, data) == predict(m, data));
}

TEST_CASE("layer sweep") {
  std::map<std::uint32_t, probe_dataset> layers;
  layers.emplace(3, blobs(60, 3, 1));
  layers.emplace(5, blobs(60, 3, 1));
  sweep_options opts;
  opts.probe.epochs = 20;
  auto scores = layer_sweep(layers, opts);
  REQUIRE(scores.size() == 2);
  CHECK(scores[0].layer_id == 3);
  CHECK(scores[0].score == scores[1].score);
  opts.workers = 2;
  const auto parallel = layer_sweep(layers, opts);
  CHECK(parallel[0].score == scores[0].score);

  std::map<std::uint32_t, probe_dataset> single;
  single.emplace(0, blobs(20, 2, 1));
  CHECK(layer_sweep(single, opts).size() == 1);

  auto other = blobs(60, 3, 1);
  other.ids[0] = "renamed";
  layers.emplace(7, other);
  CHECK_THROWS_AS(layer_sweep(layers, opts), argument_error);
  CHECK(format_layer_scores(scores).rfind("layer\tscore\tmetric\n3\t", 0) == 0);
}
