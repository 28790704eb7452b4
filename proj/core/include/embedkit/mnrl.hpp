#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "embedkit/embedding.hpp"
#include "embedkit/records.hpp"
#include "embedkit/vocab.hpp"

namespace embedkit {

struct TrainConfig {
  std::uint64_t epochs = 4;
  std::size_t batch_size = 8;  // >= 2: each anchor needs in-batch negatives
  double learning_rate = 0.05;
  double scale = 20.0;  // temperature multiplier on similarities
  std::uint64_t seed = 0;
  SimilarityMetric similarity = SimilarityMetric::kCosine;
  bool shuffle_each_epoch = true;

  void validate() const;  // throws ConfigError

  // Plain-text "key = value" file; unknown keys are an error. Keys: epochs,
  // batch_size, learning_rate, scale, seed, similarity, shuffle_each_epoch.
  static TrainConfig from_file(const std::string& path);
};

struct LossStats {
  std::vector<double> per_epoch_mean_loss;
  std::uint64_t steps = 0;  // batches processed
};

// Row-major rows x cols matrix of similarities.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Sparse gradient with respect to table rows; rows not touched by the batch
// are absent (exactly zero). Ordered keys keep the update order fixed.
struct BatchGradients {
  std::map<TokenId, std::vector<double>> rows;
  double loss = 0.0;
};

// Entry (i, j) = metric(E(anchor_i), E(positive_j)): the diagonal holds the
// matched pairs, everything off-diagonal is an in-batch negative.
Matrix sim_matrix(const EmbeddingTable& table, const Vocabulary& vocab,
                  std::span<const PairRecord> batch, SimilarityMetric metric);

// Same contract over pre-encoded token ids (what the trainer uses).
Matrix sim_matrix_ids(const EmbeddingTable& table,
                      std::span<const std::vector<TokenId>> anchors,
                      std::span<const std::vector<TokenId>> positives,
                      SimilarityMetric metric);

// In-batch softmax cross-entropy over scaled similarities:
//   L = (1/B) sum_i [ log sum_j exp(scale * S_ij) - scale * S_ii ]
// computed with the max-shift trick. Throws NotSquare / NonFinite.
double mnrl_loss(const Matrix& similarities, double scale);

// dL/dS_ij = (scale/B) * (softmax_j(scale * S_i.) - [i == j]).
// Every row of the result sums to zero.
Matrix mnrl_loss_grad(const Matrix& similarities, double scale);

// Full chain rule through the similarity and the mean pooling. A token that
// occurs k times in an n-token text receives k/n of that text's gradient.
BatchGradients backprop_batch(const EmbeddingTable& table, const Vocabulary& vocab,
                              std::span<const PairRecord> batch,
                              const TrainConfig& config);

BatchGradients backprop_batch_ids(const EmbeddingTable& table,
                                  std::span<const std::vector<TokenId>> anchors,
                                  std::span<const std::vector<TokenId>> positives,
                                  const TrainConfig& config);

// Forward pass only; the quantity the finite-difference oracle perturbs.
double batch_loss(const EmbeddingTable& table, const Vocabulary& vocab,
                  std::span<const PairRecord> batch, const TrainConfig& config);

// Central finite differences of batch_loss over every table entry,
// returned dense (vocab_size x dim, row-major).
std::vector<double> numeric_gradient(const EmbeddingTable& table,
                                     const Vocabulary& vocab,
                                     std::span<const PairRecord> batch,
                                     const TrainConfig& config, double step);

// max over entries of |a - n| / (|a| + |n| + 1e-12).
double max_rel_error(std::span<const double> analytic, std::span<const double> numeric);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_row = 0;
  std::size_t worst_col = 0;
  // Largest |numeric gradient| seen on rows the analytic gradient never
  // touched; should be ~0.
  double max_untouched_numeric = 0.0;
  double step = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Compares backprop_batch against numeric_gradient entry-wise. Intended for
// small instances (V * D <= 200 or so).
GradCheckReport grad_check(const EmbeddingTable& table, const Vocabulary& vocab,
                           std::span<const PairRecord> batch, const TrainConfig& config,
                           double step, double tolerance);

// Plain SGD over shuffled batches; the incomplete final batch is dropped.
// Deterministic given (pairs order, config, initial table).
std::pair<EmbeddingTable, LossStats> train(const PairDataset& pairs,
                                           const Vocabulary& vocab,
                                           EmbeddingTable table,
                                           const TrainConfig& config);

// One "epoch <k> mean_loss <value>" line per epoch, k starting at 1.
std::string format_loss_log(const LossStats& stats);

}  // namespace embedkit
