#include "reprbench/probe.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "reprbench/feature_io.hpp"
#include "reprbench/random.hpp"

namespace reprbench {

namespace {

// Mean-pooled inputs, computed once per dataset: a sparse bag of token
// weights (count / length) for discrete data, the mean frame otherwise.
struct pooled_inputs {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> bags;
  matrix_d means;
};

pooled_inputs pool(const probe_dataset &data) {
  pooled_inputs p;
  if (data.kind == probe_kind::embedding_bag_discrete) {
    p.bags.resize(data.size());
    for (std::size_t e = 0; e < data.size(); ++e) {
      const auto &ids = data.tokens[e];
      std::vector<std::uint32_t> sorted(ids.begin(), ids.end());
      std::sort(sorted.begin(), sorted.end());
      const double w = sorted.empty() ? 0.0 : 1.0 / static_cast<double>(sorted.size());
      for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        p.bags[e].emplace_back(sorted[i], w * static_cast<double>(j - i));
        i = j;
      }
    }
  } else {
    p.means = matrix_d(data.size(), data.input_dim, 0.0);
    for (std::size_t e = 0; e < data.size(); ++e) {
      const auto &f = data.features[e];
      auto dst = p.means.row(e);
      for (std::size_t t = 0; t < f.rows(); ++t) {
        const auto src = f.row(t);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
      }
      if (f.rows() > 0) {
        for (double &v : dst) v /= static_cast<double>(f.rows());
      }
    }
  }
  return p;
}

std::size_t hidden_of(const probe_model &m) { return m.classifier_weight.rows(); }
std::size_t classes_of(const probe_model &m) { return m.classifier_weight.cols(); }

void check_compatible(const probe_model &model, const probe_dataset &data) {
  if (model.kind != data.kind) {
    throw argument_error(std::string("probe kind mismatch: model is ") +
                         to_string(model.kind) + ", data is " + to_string(data.kind));
  }
  if (model.input_weight.rows() != data.input_dim) {
    throw argument_error("probe input width " +
                         std::to_string(model.input_weight.rows()) +
                         " does not match data width " +
                         std::to_string(data.input_dim));
  }
}

void hidden_state(const probe_model &m, const pooled_inputs &p, std::size_t e,
                  std::vector<double> &h) {
  const std::size_t f = hidden_of(m);
  h.assign(f, 0.0);
  if (m.kind == probe_kind::embedding_bag_discrete) {
    for (const auto &[id, w] : p.bags[e]) {
      const auto row = m.input_weight.row(id);
      for (std::size_t j = 0; j < f; ++j) h[j] += w * row[j];
    }
  } else {
    std::copy(m.input_bias.begin(), m.input_bias.end(), h.begin());
    const auto x = p.means.row(e);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto row = m.input_weight.row(i);
      for (std::size_t j = 0; j < f; ++j) h[j] += x[i] * row[j];
    }
  }
}

// Softmax probabilities in place of logits; max-shifted for stability.
void softmax(std::vector<double> &z) {
  const double top = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double &v : z) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double &v : z) v /= sum;
}

void class_probs(const probe_model &m, const std::vector<double> &h,
                 std::vector<double> &z) {
  const std::size_t l = classes_of(m);
  z.assign(m.classifier_bias.begin(), m.classifier_bias.end());
  for (std::size_t j = 0; j < h.size(); ++j) {
    const auto row = m.classifier_weight.row(j);
    for (std::size_t c = 0; c < l; ++c) z[c] += h[j] * row[c];
  }
  softmax(z);
}

std::vector<std::uint32_t> label_map(const probe_model &model,
                                     const probe_dataset &data) {
  std::vector<std::uint32_t> map(data.classes.size());
  for (std::size_t c = 0; c < data.classes.size(); ++c) {
    const auto it = std::find(model.classes.begin(), model.classes.end(), data.classes[c]);
    if (it == model.classes.end()) {
      throw argument_error("class '" + data.classes[c] + "' unknown to the probe");
    }
    map[c] = static_cast<std::uint32_t>(it - model.classes.begin());
  }
  return map;
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return s;
}

double objective(const probe_model &m, const pooled_inputs &p,
                 const std::vector<std::uint32_t> &targets,
                 std::span<const std::size_t> batch, double l2,
                 std::vector<double> *grad) {
  const std::size_t f = hidden_of(m);
  const std::size_t l = classes_of(m);
  const std::size_t in_w = m.input_weight.size();
  const std::size_t in_b = m.input_bias.size();
  const std::size_t cls_w = m.classifier_weight.size();
  if (grad) grad->assign(in_w + in_b + cls_w + l, 0.0);

  std::vector<double> h;
  std::vector<double> z;
  std::vector<double> dh(f);
  double loss = 0.0;
  const double scale = batch.empty() ? 0.0 : 1.0 / static_cast<double>(batch.size());
  for (const std::size_t e : batch) {
    hidden_state(m, p, e, h);
    class_probs(m, h, z);
    const std::uint32_t y = targets[e];
    loss -= std::log(std::max(z[y], 1e-300));
    if (!grad) continue;

    z[y] -= 1.0;  // dloss/dlogits
    double *g = grad->data();
    double *g_cls_w = g + in_w + in_b;
    double *g_cls_b = g_cls_w + cls_w;
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t j = 0; j < f; ++j) {
      const auto row = m.classifier_weight.row(j);
      for (std::size_t c = 0; c < l; ++c) {
        g_cls_w[j * l + c] += scale * h[j] * z[c];
        dh[j] += row[c] * z[c];
      }
    }
    for (std::size_t c = 0; c < l; ++c) g_cls_b[c] += scale * z[c];
    if (m.kind == probe_kind::embedding_bag_discrete) {
      for (const auto &[id, w] : p.bags[e]) {
        for (std::size_t j = 0; j < f; ++j) g[id * f + j] += scale * w * dh[j];
      }
    } else {
      const auto x = p.means.row(e);
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) continue;
        for (std::size_t j = 0; j < f; ++j) g[i * f + j] += scale * x[i] * dh[j];
      }
      for (std::size_t j = 0; j < f; ++j) g[in_w + j] += scale * dh[j];
    }
  }
  loss *= scale;
  loss += 0.5 * l2 * (squared_norm(m.input_weight.values()) +
                      squared_norm(m.classifier_weight.values()));
  if (grad && l2 != 0.0) {
    double *g = grad->data();
    const auto iw = m.input_weight.values();
    for (std::size_t i = 0; i < iw.size(); ++i) g[i] += l2 * iw[i];
    const auto cw = m.classifier_weight.values();
    for (std::size_t i = 0; i < cw.size(); ++i) g[in_w + in_b + i] += l2 * cw[i];
  }
  return loss;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

std::vector<std::string> sorted_classes(const std::vector<std::string> &labels) {
  const std::set<std::string> unique(labels.begin(), labels.end());
  return {unique.begin(), unique.end()};
}

std::vector<std::uint32_t> encode_labels(const std::vector<std::string> &labels,
                                         const std::vector<std::string> &classes) {
  std::vector<std::uint32_t> out;
  out.reserve(labels.size());
  for (const auto &l : labels) {
    out.push_back(static_cast<std::uint32_t>(
        std::lower_bound(classes.begin(), classes.end(), l) - classes.begin()));
  }
  return out;
}

}  // namespace

const char *to_string(probe_kind kind) noexcept {
  return kind == probe_kind::embedding_bag_discrete ? "discrete" : "continuous";
}

probe_kind parse_probe_kind(std::string_view text) {
  if (text == "discrete") return probe_kind::embedding_bag_discrete;
  if (text == "continuous") return probe_kind::mean_pool_continuous;
  throw argument_error("unknown probe kind '" + std::string(text) +
                       "' (expected discrete or continuous)");
}

probe_dataset make_discrete_dataset(std::vector<std::string> ids,
                                    std::vector<std::vector<std::uint32_t>> tokens,
                                    const std::vector<std::string> &labels,
                                    std::size_t vocab) {
  if (ids.size() != tokens.size() || ids.size() != labels.size()) {
    throw argument_error("probe dataset: ids, tokens and labels differ in length");
  }
  if (vocab == 0) {
    throw argument_error("probe dataset: vocabulary size must be positive");
  }
  for (std::size_t e = 0; e < tokens.size(); ++e) {
    for (const auto id : tokens[e]) {
      if (id >= vocab) {
        throw validation_error("probe dataset: token " + std::to_string(id) +
                               " in '" + ids[e] + "' exceeds vocabulary " +
                               std::to_string(vocab));
      }
    }
  }
  probe_dataset d;
  d.kind = probe_kind::embedding_bag_discrete;
  d.ids = std::move(ids);
  d.tokens = std::move(tokens);
  d.classes = sorted_classes(labels);
  d.labels = encode_labels(labels, d.classes);
  d.input_dim = vocab;
  return d;
}

probe_dataset make_continuous_dataset(std::vector<std::string> ids,
                                      std::vector<matrix_f> features,
                                      const std::vector<std::string> &labels) {
  if (ids.size() != features.size() || ids.size() != labels.size()) {
    throw argument_error("probe dataset: ids, features and labels differ in length");
  }
  if (features.empty()) {
    throw argument_error("probe dataset: no examples");
  }
  const std::size_t dim = features.front().cols();
  for (std::size_t e = 0; e < features.size(); ++e) {
    if (features[e].cols() != dim || dim == 0) {
      throw argument_error("probe dataset: '" + ids[e] + "' has feature width " +
                           std::to_string(features[e].cols()) + ", expected " +
                           std::to_string(dim));
    }
  }
  probe_dataset d;
  d.kind = probe_kind::mean_pool_continuous;
  d.ids = std::move(ids);
  d.features = std::move(features);
  d.classes = sorted_classes(labels);
  d.labels = encode_labels(labels, d.classes);
  d.input_dim = dim;
  return d;
}

probe_dataset subset(const probe_dataset &data, std::span<const std::size_t> indices) {
  probe_dataset out;
  out.kind = data.kind;
  out.classes = data.classes;
  out.input_dim = data.input_dim;
  for (const auto i : indices) {
    if (i >= data.size()) throw argument_error("subset: index out of range");
    out.ids.push_back(data.ids[i]);
    out.labels.push_back(data.labels[i]);
    if (data.kind == probe_kind::embedding_bag_discrete) {
      out.tokens.push_back(data.tokens[i]);
    } else {
      out.features.push_back(data.features[i]);
    }
  }
  return out;
}

split_indices make_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw argument_error("split: test fraction must lie in (0, 1)");
  }
  auto order = all_indices(n);
  rng gen(seed);
  std::shuffle(order.begin(), order.end(), gen);
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n >= 2) n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  split_indices s;
  s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

probe_model init_probe(const probe_dataset &data, const probe_config &config) {
  if (config.hidden == 0) {
    throw argument_error("probe: hidden width must be positive");
  }
  if (data.input_dim == 0 || data.classes.empty()) {
    throw argument_error("probe: dataset has no input width or classes");
  }
  rng gen(derive_seed(config.seed, "probe.init"));
  auto fill = [&](std::span<double> v, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double &x : v) x = dist(gen);
  };
  probe_model m;
  m.kind = data.kind;
  m.classes = data.classes;
  m.input_weight = matrix_d(data.input_dim, config.hidden);
  if (data.kind == probe_kind::embedding_bag_discrete) {
    fill(m.input_weight.values(), 1.0);
  } else {
    const double bound = 1.0 / std::sqrt(static_cast<double>(data.input_dim));
    fill(m.input_weight.values(), bound);
    m.input_bias.resize(config.hidden);
    fill(m.input_bias, bound);
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.hidden));
  m.classifier_weight = matrix_d(config.hidden, data.classes.size());
  fill(m.classifier_weight.values(), bound);
  m.classifier_bias.resize(data.classes.size());
  fill(m.classifier_bias, bound);
  return m;
}

std::vector<double> flatten(const probe_model &model) {
  std::vector<double> p;
  p.reserve(model.input_weight.size() + model.input_bias.size() +
            model.classifier_weight.size() + model.classifier_bias.size());
  p.insert(p.end(), model.input_weight.values().begin(), model.input_weight.values().end());
  p.insert(p.end(), model.input_bias.begin(), model.input_bias.end());
  p.insert(p.end(), model.classifier_weight.values().begin(),
           model.classifier_weight.values().end());
  p.insert(p.end(), model.classifier_bias.begin(), model.classifier_bias.end());
  return p;
}

void unflatten(probe_model &model, std::span<const double> params) {
  const std::size_t expected = model.input_weight.size() + model.input_bias.size() +
                               model.classifier_weight.size() +
                               model.classifier_bias.size();
  if (params.size() != expected) {
    throw argument_error("unflatten: parameter count mismatch");
  }
  auto it = params.begin();
  auto take = [&](std::span<double> dst) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(dst.size()), dst.begin());
    it += static_cast<std::ptrdiff_t>(dst.size());
  };
  take(model.input_weight.values());
  take(model.input_bias);
  take(model.classifier_weight.values());
  take(model.classifier_bias);
}

loss_and_gradient probe_objective(const probe_model &model, const probe_dataset &data,
                                  std::span<const std::size_t> batch, double l2) {
  check_compatible(model, data);
  const auto map = label_map(model, data);
  std::vector<std::uint32_t> targets(data.size());
  for (std::size_t e = 0; e < data.size(); ++e) targets[e] = map[data.labels[e]];
  loss_and_gradient out;
  out.loss = objective(model, pool(data), targets, batch, l2, &out.gradient);
  return out;
}

double probe_loss(const probe_model &model, const probe_dataset &data, double l2) {
  check_compatible(model, data);
  const auto map = label_map(model, data);
  std::vector<std::uint32_t> targets(data.size());
  for (std::size_t e = 0; e < data.size(); ++e) targets[e] = map[data.labels[e]];
  const auto idx = all_indices(data.size());
  return objective(model, pool(data), targets, idx, l2, nullptr);
}

probe_training train_probe(const probe_dataset &data, const probe_config &config) {
  if (data.classes.size() < 2) {
    throw argument_error("train_probe: need at least two classes, got " +
                         std::to_string(data.classes.size()));
  }
  if (config.batch_size == 0 || !(config.learning_rate > 0.0) || config.l2 < 0.0) {
    throw argument_error("train_probe: batch size and learning rate must be positive");
  }
  probe_training out;
  out.model = init_probe(data, config);
  const pooled_inputs pooled = pool(data);
  const auto &targets = data.labels;
  const auto everything = all_indices(data.size());
  double lr = config.learning_rate;

  out.loss_trace.push_back(objective(out.model, pooled, targets, everything, config.l2, nullptr));
  rng gen(derive_seed(config.seed, "probe.shuffle"));
  std::vector<std::size_t> order = everything;
  std::vector<double> grad;

  for (std::size_t epoch = 0; epoch < config.epochs && !out.stalled; ++epoch) {
    std::shuffle(order.begin(), order.end(), gen);
    for (;;) {
      probe_model candidate = out.model;
      auto params = flatten(candidate);
      bool finite = true;
      std::size_t failed_step = 0;
      for (std::size_t start = 0, step = 0; start < order.size();
           start += config.batch_size, ++step) {
        const std::span<const std::size_t> batch(
            order.data() + start, std::min(config.batch_size, order.size() - start));
        const double batch_loss =
            objective(candidate, pooled, targets, batch, config.l2, &grad);
        if (!std::isfinite(batch_loss)) {
          finite = false;
          failed_step = step;
          break;
        }
        for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
        unflatten(candidate, params);
      }
      const double loss =
          finite ? objective(candidate, pooled, targets, everything, config.l2, nullptr)
                 : std::numeric_limits<double>::quiet_NaN();
      if (std::isfinite(loss) && loss <= out.loss_trace.back()) {
        out.model = std::move(candidate);
        out.loss_trace.push_back(loss);
        break;
      }
      if (out.lr_halvings >= config.max_lr_halvings) {
        if (!std::isfinite(loss)) {
          throw divergence_error("train_probe: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", step " +
                                 std::to_string(failed_step) + " after " +
                                 std::to_string(out.lr_halvings) +
                                 " learning-rate halvings");
        }
        out.stalled = true;
        break;
      }
      lr *= 0.5;
      ++out.lr_halvings;
    }
  }
  out.final_learning_rate = lr;
  return out;
}

std::vector<std::vector<double>> predict_proba(const probe_model &model,
                                               const probe_dataset &data) {
  check_compatible(model, data);
  const auto pooled = pool(data);
  std::vector<std::vector<double>> out(data.size());
  std::vector<double> h;
  for (std::size_t e = 0; e < data.size(); ++e) {
    hidden_state(model, pooled, e, h);
    class_probs(model, h, out[e]);
  }
  return out;
}

std::vector<std::uint32_t> predict(const probe_model &model, const probe_dataset &data) {
  const auto probs = predict_proba(model, data);
  std::vector<std::uint32_t> out;
  out.reserve(probs.size());
  for (const auto &p : probs) {
    out.push_back(static_cast<std::uint32_t>(std::max_element(p.begin(), p.end()) - p.begin()));
  }
  return out;
}

double eval_probe(const probe_model &model, const probe_dataset &data) {
  if (data.size() == 0) {
    throw argument_error("eval_probe: empty dataset");
  }
  const auto pred = predict(model, data);
  std::size_t hits = 0;
  for (std::size_t e = 0; e < data.size(); ++e) {
    hits += model.classes[pred[e]] == data.classes[data.labels[e]] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

namespace {

std::filesystem::path sibling(const std::filesystem::path &prefix, const std::string &part) {
  return prefix.string() + "." + part + ".srf";
}

void store_block(const matrix_d &m, const std::filesystem::path &path) {
  feature_sequence seq;
  seq.frames = matrix_f(m.rows(), m.cols());
  std::transform(m.values().begin(), m.values().end(), seq.frames.values().begin(),
                 [](double v) { return static_cast<float>(v); });
  seq.rate = {1, 1};
  store_features(seq, path);
}

matrix_d load_block(const std::filesystem::path &path, std::size_t rows, std::size_t cols) {
  const auto seq = load_features(path);
  if (seq.num_frames() != rows || seq.dim() != cols) {
    throw validation_error(path.string() + ": shape does not match the probe manifest");
  }
  matrix_d m(rows, cols);
  std::copy(seq.frames.values().begin(), seq.frames.values().end(), m.values().begin());
  return m;
}

}  // namespace

void store_probe(const probe_model &model, const std::filesystem::path &prefix) {
  nlohmann::json j;
  j["format"] = "reprbench-probe";
  j["version"] = 1;
  j["kind"] = to_string(model.kind);
  j["classes"] = model.classes;
  j["input_dim"] = model.input_weight.rows();
  j["hidden"] = model.classifier_weight.rows();
  const auto name = prefix.filename().string();
  j["files"]["input_weight"] = name + ".input_weight.srf";
  j["files"]["classifier_weight"] = name + ".classifier_weight.srf";
  j["files"]["classifier_bias"] = name + ".classifier_bias.srf";
  store_block(model.input_weight, sibling(prefix, "input_weight"));
  store_block(model.classifier_weight, sibling(prefix, "classifier_weight"));
  store_block(matrix_d(1, model.classifier_bias.size(), model.classifier_bias),
              sibling(prefix, "classifier_bias"));
  if (!model.input_bias.empty()) {
    j["files"]["input_bias"] = name + ".input_bias.srf";
    store_block(matrix_d(1, model.input_bias.size(), model.input_bias),
                sibling(prefix, "input_bias"));
  }
  detail::write_text_file(prefix.string() + ".json", j.dump(2) + "\n");
}

probe_model load_probe(const std::filesystem::path &prefix) {
  const auto path = prefix.string() + ".json";
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_text_file(path));
  } catch (const nlohmann::json::exception &e) {
    throw format_error(path + ": " + e.what());
  }
  if (j.value("format", "") != "reprbench-probe" || j.value("version", 0) != 1) {
    throw format_error(path + ": not a probe manifest");
  }
  probe_model m;
  try {
    m.kind = parse_probe_kind(j.at("kind").get<std::string>());
    m.classes = j.at("classes").get<std::vector<std::string>>();
    const auto in = j.at("input_dim").get<std::size_t>();
    const auto hidden = j.at("hidden").get<std::size_t>();
    const auto l = m.classes.size();
    m.input_weight = load_block(sibling(prefix, "input_weight"), in, hidden);
    m.classifier_weight = load_block(sibling(prefix, "classifier_weight"), hidden, l);
    const auto cb = load_block(sibling(prefix, "classifier_bias"), 1, l);
    m.classifier_bias.assign(cb.values().begin(), cb.values().end());
    if (m.kind == probe_kind::mean_pool_continuous) {
      const auto ib = load_block(sibling(prefix, "input_bias"), 1, hidden);
      m.input_bias.assign(ib.values().begin(), ib.values().end());
    }
  } catch (const nlohmann::json::exception &e) {
    throw format_error(path + ": " + e.what());
  }
  return m;
}

std::vector<layer_score> layer_sweep(const std::map<std::uint32_t, probe_dataset> &per_layer,
                                     const sweep_options &options) {
  if (per_layer.empty()) {
    throw argument_error("layer_sweep: no layers given");
  }
  const auto &first = per_layer.begin()->second;
  std::vector<std::string> reference_ids = first.ids;
  std::sort(reference_ids.begin(), reference_ids.end());
  if (std::adjacent_find(reference_ids.begin(), reference_ids.end()) != reference_ids.end()) {
    throw argument_error("layer_sweep: duplicate utterance ids");
  }

  // Align every layer to the first layer's utterance order so all layers
  // share one split.
  std::vector<std::pair<std::uint32_t, probe_dataset>> aligned;
  for (const auto &[layer, data] : per_layer) {
    auto ids = data.ids;
    std::sort(ids.begin(), ids.end());
    if (ids != reference_ids) {
      throw argument_error("layer_sweep: layer " + std::to_string(layer) +
                           " covers a different utterance set than layer " +
                           std::to_string(per_layer.begin()->first));
    }
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < data.ids.size(); ++i) position[data.ids[i]] = i;
    std::vector<std::size_t> order;
    for (const auto &id : first.ids) order.push_back(position[id]);
    aligned.emplace_back(layer, subset(data, order));
  }

  const auto split = make_split(first.size(), options.test_fraction,
                                derive_seed(options.probe.seed, "split"));
  auto run = [&](std::size_t i) {
    const auto &[layer, data] = aligned[i];
    const auto train = subset(data, split.train);
    const auto test = subset(data, split.test);
    const auto trained = train_probe(train, options.probe);
    return layer_score{layer, eval_probe(trained.model, test), "accuracy"};
  };

  std::vector<layer_score> scores(aligned.size());
  const std::size_t workers = std::max<std::size_t>(1, options.workers);
  for (std::size_t start = 0; start < aligned.size(); start += workers) {
    std::vector<std::future<layer_score>> pending;
    const std::size_t end = std::min(aligned.size(), start + workers);
    for (std::size_t i = start; i + 1 < end; ++i) {
      pending.push_back(std::async(std::launch::async, run, i));
    }
    scores[end - 1] = run(end - 1);
    for (std::size_t i = start; i + 1 < end; ++i) scores[i] = pending[i - start].get();
  }
  return scores;
}

std::string format_layer_scores(const std::vector<layer_score> &scores) {
  std::string out = "layer\tscore\tmetric\n";
  for (const auto &s : scores) {
    out += std::to_string(s.layer_id) + "\t" + detail::format_double(s.score) + "\t" +
           s.metric + "\n";
  }
  return out;
}

}  // namespace reprbench
