#include "embedkit/mnrl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "embedkit/errors.hpp"
#include "embedkit/kvconfig.hpp"
#include "embedkit/rng.hpp"

namespace embedkit {

namespace {

constexpr double kNormFloor = 1e-12;

struct PooledBatch {
  std::vector<SentenceEmbedding> anchors;
  std::vector<SentenceEmbedding> positives;
  std::vector<double> anchor_norms;
  std::vector<double> positive_norms;
};

double l2_norm(const SentenceEmbedding& v) {
  double acc = 0.0;
  for (const double x : v) acc += x * x;
  return std::sqrt(acc);
}

PooledBatch pool_batch(const EmbeddingTable& table,
                       std::span<const std::vector<TokenId>> anchors,
                       std::span<const std::vector<TokenId>> positives) {
  PooledBatch pooled;
  pooled.anchors.reserve(anchors.size());
  pooled.positives.reserve(positives.size());
  for (const auto& ids : anchors) {
    pooled.anchors.push_back(table.mean_pool(ids));
    pooled.anchor_norms.push_back(l2_norm(pooled.anchors.back()));
  }
  for (const auto& ids : positives) {
    pooled.positives.push_back(table.mean_pool(ids));
    pooled.positive_norms.push_back(l2_norm(pooled.positives.back()));
  }
  return pooled;
}

void encode_batch(const Vocabulary& vocab, std::span<const PairRecord> batch,
                  std::vector<std::vector<TokenId>>& anchors,
                  std::vector<std::vector<TokenId>>& positives) {
  anchors.clear();
  positives.clear();
  for (const auto& pair : batch) {
    auto anchor_ids = encode(vocab, pair.anchor);
    auto positive_ids = encode(vocab, pair.positive);
    if (anchor_ids.empty()) throw EmptyInput("batch anchor has no tokens: '" + pair.anchor + "'");
    if (positive_ids.empty()) {
      throw EmptyInput("batch positive has no tokens: '" + pair.positive + "'");
    }
    anchors.push_back(std::move(anchor_ids));
    positives.push_back(std::move(positive_ids));
  }
}

void check_square(const Matrix& m) {
  if (m.rows != m.cols || m.data.size() != m.rows * m.cols) {
    throw NotSquare("similarity matrix is " + std::to_string(m.rows) + "x" +
                    std::to_string(m.cols));
  }
  if (m.rows < 2) throw InvalidArgument("MNRL needs a batch of at least 2");
  for (const double v : m.data) {
    if (!std::isfinite(v)) throw NonFinite("similarity matrix contains a non-finite entry");
  }
}

// Adds weight * source into the gradient row for each occurrence of each id.
void scatter_rows(std::map<TokenId, std::vector<double>>& rows, std::size_t dim,
                  const std::vector<TokenId>& ids, const SentenceEmbedding& grad) {
  const double inv_n = 1.0 / static_cast<double>(ids.size());
  for (const TokenId id : ids) {
    auto [it, inserted] = rows.try_emplace(id, std::vector<double>(dim, 0.0));
    auto& row = it->second;
    for (std::size_t d = 0; d < dim; ++d) row[d] += inv_n * grad[d];
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (!(std::isfinite(learning_rate) && learning_rate > 0.0)) {
    throw ConfigError("learning_rate must be finite and positive");
  }
  if (!(std::isfinite(scale) && scale > 0.0)) {
    throw ConfigError("scale must be finite and positive");
  }
}

TrainConfig TrainConfig::from_file(const std::string& path) {
  TrainConfig config;
  for (const auto& entry : parse_kv_file(path)) {
    const std::string context = path + ": line " + std::to_string(entry.line);
    if (entry.key == "epochs") {
      config.epochs = parse_u64(entry.value, context);
    } else if (entry.key == "batch_size") {
      config.batch_size = parse_u64(entry.value, context);
    } else if (entry.key == "learning_rate") {
      config.learning_rate = parse_f64(entry.value, context);
    } else if (entry.key == "scale") {
      config.scale = parse_f64(entry.value, context);
    } else if (entry.key == "seed") {
      config.seed = parse_u64(entry.value, context);
    } else if (entry.key == "similarity") {
      config.similarity = parse_metric(entry.value);
    } else if (entry.key == "shuffle_each_epoch") {
      if (entry.value == "true") {
        config.shuffle_each_epoch = true;
      } else if (entry.value == "false") {
        config.shuffle_each_epoch = false;
      } else {
        throw ConfigError(context + ": shuffle_each_epoch must be true or false");
      }
    } else {
      throw ConfigError(context + ": unknown key '" + entry.key + "'");
    }
  }
  config.validate();
  return config;
}

Matrix sim_matrix_ids(const EmbeddingTable& table,
                      std::span<const std::vector<TokenId>> anchors,
                      std::span<const std::vector<TokenId>> positives,
                      SimilarityMetric metric) {
  if (anchors.size() != positives.size()) {
    throw InvalidArgument("sim_matrix: anchor and positive counts differ");
  }
  if (anchors.size() < 2) throw InvalidArgument("sim_matrix: batch must have >= 2 pairs");
  const auto pooled = pool_batch(table, anchors, positives);
  const std::size_t b = anchors.size();
  Matrix s(b, b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      s.at(i, j) = similarity(metric, pooled.anchors[i], pooled.positives[j]);
    }
  }
  return s;
}

Matrix sim_matrix(const EmbeddingTable& table, const Vocabulary& vocab,
                  std::span<const PairRecord> batch, SimilarityMetric metric) {
  std::vector<std::vector<TokenId>> anchors, positives;
  encode_batch(vocab, batch, anchors, positives);
  return sim_matrix_ids(table, anchors, positives, metric);
}

double mnrl_loss(const Matrix& similarities, double scale) {
  check_square(similarities);
  if (!(std::isfinite(scale) && scale > 0.0)) {
    throw InvalidArgument("mnrl_loss: scale must be finite and positive");
  }
  const std::size_t b = similarities.rows;
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    double row_max = similarities.at(i, 0) * scale;
    for (std::size_t j = 1; j < b; ++j) {
      row_max = std::max(row_max, similarities.at(i, j) * scale);
    }
    double sum_exp = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
      sum_exp += std::exp(similarities.at(i, j) * scale - row_max);
    }
    const double log_sum_exp = row_max + std::log(sum_exp);
    total += log_sum_exp - scale * similarities.at(i, i);
  }
  const double loss = total / static_cast<double>(b);
  if (!std::isfinite(loss)) throw NonFinite("mnrl_loss: non-finite loss");
  return loss;
}

Matrix mnrl_loss_grad(const Matrix& similarities, double scale) {
  check_square(similarities);
  if (!(std::isfinite(scale) && scale > 0.0)) {
    throw InvalidArgument("mnrl_loss_grad: scale must be finite and positive");
  }
  const std::size_t b = similarities.rows;
  Matrix grad(b, b);
  for (std::size_t i = 0; i < b; ++i) {
    double row_max = similarities.at(i, 0) * scale;
    for (std::size_t j = 1; j < b; ++j) {
      row_max = std::max(row_max, similarities.at(i, j) * scale);
    }
    double sum_exp = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
      sum_exp += std::exp(similarities.at(i, j) * scale - row_max);
    }
    for (std::size_t j = 0; j < b; ++j) {
      const double softmax = std::exp(similarities.at(i, j) * scale - row_max) / sum_exp;
      const double indicator = i == j ? 1.0 : 0.0;
      grad.at(i, j) = scale / static_cast<double>(b) * (softmax - indicator);
    }
  }
  return grad;
}

BatchGradients backprop_batch_ids(const EmbeddingTable& table,
                                  std::span<const std::vector<TokenId>> anchors,
                                  std::span<const std::vector<TokenId>> positives,
                                  const TrainConfig& config) {
  const auto pooled = pool_batch(table, anchors, positives);
  const std::size_t b = anchors.size();
  const std::size_t dim = table.dim();

  Matrix s(b, b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      s.at(i, j) = similarity(config.similarity, pooled.anchors[i], pooled.positives[j]);
    }
  }

  BatchGradients result;
  result.loss = mnrl_loss(s, config.scale);
  const Matrix g = mnrl_loss_grad(s, config.scale);

  std::vector<SentenceEmbedding> d_anchor(b, SentenceEmbedding(dim, 0.0));
  std::vector<SentenceEmbedding> d_positive(b, SentenceEmbedding(dim, 0.0));

  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const double gij = g.at(i, j);
      const auto& a = pooled.anchors[i];
      const auto& p = pooled.positives[j];
      if (config.similarity == SimilarityMetric::kDot) {
        for (std::size_t d = 0; d < dim; ++d) {
          d_anchor[i][d] += gij * p[d];
          d_positive[j][d] += gij * a[d];
        }
        continue;
      }
      const double na = pooled.anchor_norms[i];
      const double np = pooled.positive_norms[j];
      // Degenerate embeddings sit in the flat S = 0 region of the cosine
      // convention; no gradient flows through them.
      if (na < kNormFloor || np < kNormFloor) continue;
      const double sij = s.at(i, j);
      const double inv_nanp = 1.0 / (na * np);
      const double inv_na2 = 1.0 / (na * na);
      const double inv_np2 = 1.0 / (np * np);
      for (std::size_t d = 0; d < dim; ++d) {
        d_anchor[i][d] += gij * (p[d] * inv_nanp - sij * a[d] * inv_na2);
        d_positive[j][d] += gij * (a[d] * inv_nanp - sij * p[d] * inv_np2);
      }
    }
  }

  for (std::size_t i = 0; i < b; ++i) {
    scatter_rows(result.rows, dim, anchors[i], d_anchor[i]);
    scatter_rows(result.rows, dim, positives[i], d_positive[i]);
  }
  return result;
}

BatchGradients backprop_batch(const EmbeddingTable& table, const Vocabulary& vocab,
                              std::span<const PairRecord> batch,
                              const TrainConfig& config) {
  std::vector<std::vector<TokenId>> anchors, positives;
  encode_batch(vocab, batch, anchors, positives);
  return backprop_batch_ids(table, anchors, positives, config);
}

double batch_loss(const EmbeddingTable& table, const Vocabulary& vocab,
                  std::span<const PairRecord> batch, const TrainConfig& config) {
  return mnrl_loss(sim_matrix(table, vocab, batch, config.similarity), config.scale);
}

std::vector<double> numeric_gradient(const EmbeddingTable& table,
                                     const Vocabulary& vocab,
                                     std::span<const PairRecord> batch,
                                     const TrainConfig& config, double step) {
  if (!(std::isfinite(step) && step > 0.0)) {
    throw InvalidArgument("numeric_gradient: step must be finite and positive");
  }
  EmbeddingTable probe = table;
  auto& weights = probe.mutable_weights();
  std::vector<double> grad(weights.size(), 0.0);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double original = weights[k];
    weights[k] = original + step;
    const double loss_plus = batch_loss(probe, vocab, batch, config);
    weights[k] = original - step;
    const double loss_minus = batch_loss(probe, vocab, batch, config);
    weights[k] = original;
    grad[k] = (loss_plus - loss_minus) / (2.0 * step);
  }
  return grad;
}

double max_rel_error(std::span<const double> analytic, std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) {
    throw DimensionMismatch("max_rel_error: gradient sizes differ");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double denom = std::abs(analytic[k]) + std::abs(numeric[k]) + 1e-12;
    worst = std::max(worst, std::abs(analytic[k] - numeric[k]) / denom);
  }
  return worst;
}

GradCheckReport grad_check(const EmbeddingTable& table, const Vocabulary& vocab,
                           std::span<const PairRecord> batch, const TrainConfig& config,
                           double step, double tolerance) {
  const auto analytic_sparse = backprop_batch(table, vocab, batch, config);
  const auto numeric = numeric_gradient(table, vocab, batch, config, step);

  const std::size_t dim = table.dim();
  std::vector<double> analytic(table.vocab_size() * dim, 0.0);
  for (const auto& [id, row] : analytic_sparse.rows) {
    std::copy(row.begin(), row.end(), analytic.begin() + static_cast<std::size_t>(id) * dim);
  }

  GradCheckReport report;
  report.step = step;
  report.tolerance = tolerance;
  for (std::size_t r = 0; r < table.vocab_size(); ++r) {
    const bool touched = analytic_sparse.rows.count(static_cast<TokenId>(r)) != 0;
    for (std::size_t c = 0; c < dim; ++c) {
      const std::size_t k = r * dim + c;
      const double denom = std::abs(analytic[k]) + std::abs(numeric[k]) + 1e-12;
      const double rel = std::abs(analytic[k] - numeric[k]) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_row = r;
        report.worst_col = c;
      }
      if (!touched) {
        report.max_untouched_numeric =
            std::max(report.max_untouched_numeric, std::abs(numeric[k]));
      }
    }
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

std::pair<EmbeddingTable, LossStats> train(const PairDataset& pairs,
                                           const Vocabulary& vocab,
                                           EmbeddingTable table,
                                           const TrainConfig& config) {
  config.validate();
  if (pairs.size() < config.batch_size) {
    throw DatasetTooSmall("dataset has " + std::to_string(pairs.size()) +
                          " pairs, batch_size is " + std::to_string(config.batch_size));
  }

  std::vector<std::vector<TokenId>> anchor_ids, positive_ids;
  encode_batch(vocab, pairs, anchor_ids, positive_ids);

  const std::size_t n = pairs.size();
  const std::size_t num_batches = n / config.batch_size;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.seed);

  LossStats stats;
  std::vector<std::vector<TokenId>> batch_anchors(config.batch_size);
  std::vector<std::vector<TokenId>> batch_positives(config.batch_size);

  for (std::uint64_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle_each_epoch) shuffle(order, rng);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < num_batches; ++b) {
      for (std::size_t k = 0; k < config.batch_size; ++k) {
        const std::size_t idx = order[b * config.batch_size + k];
        batch_anchors[k] = anchor_ids[idx];
        batch_positives[k] = positive_ids[idx];
      }
      const auto grads = backprop_batch_ids(table, batch_anchors, batch_positives, config);
      for (const auto& [id, grad_row] : grads.rows) {
        auto row = table.mutable_row(id);
        for (std::size_t d = 0; d < row.size(); ++d) {
          row[d] -= config.learning_rate * grad_row[d];
        }
      }
      table.check_finite();
      loss_sum += grads.loss;
      ++stats.steps;
    }
    stats.per_epoch_mean_loss.push_back(loss_sum / static_cast<double>(num_batches));
    if (!std::isfinite(stats.per_epoch_mean_loss.back())) {
      throw NonFinite("train: non-finite epoch loss");
    }
  }
  return {std::move(table), std::move(stats)};
}

std::string format_loss_log(const LossStats& stats) {
  std::string out;
  for (std::size_t k = 0; k < stats.per_epoch_mean_loss.size(); ++k) {
    out += "epoch " + std::to_string(k + 1) + " mean_loss ";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, stats.per_epoch_mean_loss[k]);
    out.append(buf, res.ptr);
    out.push_back('\n');
  }
  return out;
}

}  // namespace embedkit
