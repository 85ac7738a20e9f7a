#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "reprbench/matrix.hpp"
#include "reprbench/quantizer.hpp"

namespace reprbench {

// Probes are small softmax classifiers over frozen representations. They
// measure how much task information a representation exposes; they are not
// a stand-in for the accuracy an LLM decoder would reach.

enum class probe_kind { embedding_bag_discrete, mean_pool_continuous };

const char *to_string(probe_kind kind) noexcept;
probe_kind parse_probe_kind(std::string_view text);

/// Labelled utterances in one representation. Discrete examples carry token
/// ids, continuous ones a T x D feature matrix.
struct probe_dataset {
  probe_kind kind = probe_kind::mean_pool_continuous;
  std::vector<std::string> ids;
  std::vector<std::vector<std::uint32_t>> tokens;
  std::vector<matrix_f> features;
  std::vector<std::uint32_t> labels;  // index into classes
  std::vector<std::string> classes;   // sorted, unique
  std::size_t input_dim = 0;          // vocab size or feature width

  std::size_t size() const noexcept { return labels.size(); }
};

/// Label strings are mapped onto the sorted set of distinct labels.
probe_dataset make_discrete_dataset(std::vector<std::string> ids,
                                    std::vector<std::vector<std::uint32_t>> tokens,
                                    const std::vector<std::string> &labels,
                                    std::size_t vocab);
probe_dataset make_continuous_dataset(std::vector<std::string> ids,
                                      std::vector<matrix_f> features,
                                      const std::vector<std::string> &labels);

/// Rows `indices` of `data`, keeping the class list.
probe_dataset subset(const probe_dataset &data,
                     std::span<const std::size_t> indices);

/// Deterministic train/test split of n examples; the test side gets
/// round(n * test_fraction) examples, at least one when n >= 2.
struct split_indices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
split_indices make_split(std::size_t n, double test_fraction, std::uint64_t seed);

struct probe_model {
  probe_kind kind = probe_kind::mean_pool_continuous;
  /// Embedding table (vocab x hidden) for the discrete kind, adapter weight
  /// (D x hidden) for the continuous kind.
  matrix_d input_weight;
  /// Adapter bias; empty for the discrete kind.
  std::vector<double> input_bias;
  matrix_d classifier_weight;  // hidden x classes
  std::vector<double> classifier_bias;
  std::vector<std::string> classes;

  bool operator==(const probe_model &) const = default;
};

struct probe_config {
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  double l2 = 1e-4;
  std::size_t hidden = 32;
  std::size_t max_lr_halvings = 10;
};

/// Parameters drawn uniformly from +-1/sqrt(fan_in); the embedding table
/// uses fan_in = 1.
probe_model init_probe(const probe_dataset &data, const probe_config &config);

/// Number of trainable parameters and their flat layout: input weight,
/// input bias, classifier weight, classifier bias.
std::vector<double> flatten(const probe_model &model);
void unflatten(probe_model &model, std::span<const double> params);

struct loss_and_gradient {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as flatten()
};

/// Mean cross-entropy over `batch` plus 0.5 * l2 * (|input_weight|^2 +
/// |classifier_weight|^2), with its analytic gradient.
loss_and_gradient probe_objective(const probe_model &model,
                                  const probe_dataset &data,
                                  std::span<const std::size_t> batch, double l2);
double probe_loss(const probe_model &model, const probe_dataset &data, double l2);

struct probe_training {
  probe_model model;
  /// Full-data objective at initialisation and after each accepted epoch.
  std::vector<double> loss_trace;
  std::size_t lr_halvings = 0;
  double final_learning_rate = 0.0;
  /// Training ended because the objective kept rising after the last
  /// permitted halving.
  bool stalled = false;
};

/// Mini-batch gradient descent on probe_objective. An epoch whose full-data
/// objective rises (or turns non-finite) is rolled back and retried at half
/// the learning rate; after `max_lr_halvings` a non-finite objective throws
/// divergence_error and a finite one ends training.
probe_training train_probe(const probe_dataset &data, const probe_config &config);

std::vector<std::vector<double>> predict_proba(const probe_model &model,
                                               const probe_dataset &data);
std::vector<std::uint32_t> predict(const probe_model &model,
                                   const probe_dataset &data);
/// Fraction of examples whose argmax class name equals the true label.
double eval_probe(const probe_model &model, const probe_dataset &data);

/// `<prefix>.json` describes the model; each parameter block is an SRF1
/// file next to it.
void store_probe(const probe_model &model, const std::filesystem::path &prefix);
probe_model load_probe(const std::filesystem::path &prefix);

struct layer_score {
  std::uint32_t layer_id = 0;
  double score = 0.0;
  std::string metric = "accuracy";
};

struct sweep_options {
  probe_config probe;
  double test_fraction = 0.25;
  std::size_t workers = 1;
};

/// Trains an independent probe per layer with identical config and split,
/// and scores it on the held-out examples.
std::vector<layer_score> layer_sweep(
    const std::map<std::uint32_t, probe_dataset> &per_layer,
    const sweep_options &options);

std::string format_layer_scores(const std::vector<layer_score> &scores);

struct alignment_record {
  std::uint32_t layer_id = 0;
  double similarity = 0.0;
  std::size_t speech_vectors = 0;
  /// Zero vectors skipped on either side.
  std::size_t excluded_zero = 0;
};

/// Per layer: for every speech vector the maximum cosine similarity over all
/// text vectors, averaged over speech vectors.
std::vector<alignment_record> alignment_similarity(
    const std::map<std::uint32_t, matrix_f> &speech,
    const std::map<std::uint32_t, matrix_f> &text);

std::string format_alignment(const std::vector<alignment_record> &records);

}  // namespace reprbench
