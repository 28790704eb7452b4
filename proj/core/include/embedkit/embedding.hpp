#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "embedkit/vocab.hpp"

namespace embedkit {

using SentenceEmbedding = std::vector<double>;

enum class SimilarityMetric { kCosine, kDot };

SimilarityMetric parse_metric(const std::string& name);  // "cosine" | "dot"
std::string metric_name(SimilarityMetric metric);

// V x D row-major token-vector matrix. This is the entire model: a sentence
// embeds as the mean of its token rows.
class EmbeddingTable {
 public:
  // Entries i.i.d. uniform on [-0.5/dim, +0.5/dim] from a seeded stream;
  // identical (vocab_size, dim, seed) reproduce the table bit-for-bit.
  static EmbeddingTable init(std::size_t vocab_size, std::size_t dim,
                             std::uint64_t seed);

  EmbeddingTable(std::size_t vocab_size, std::size_t dim,
                 std::vector<double> weights);

  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t dim() const { return dim_; }

  std::span<const double> row(std::size_t i) const;
  std::span<double> mutable_row(std::size_t i);

  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& mutable_weights() { return weights_; }

  // Throws NonFinite if any entry is NaN or infinite. Called after init,
  // after load, and after every training step.
  void check_finite() const;

  // Component-wise mean of the selected rows. Duplicate ids count once per
  // occurrence.
  SentenceEmbedding mean_pool(std::span<const TokenId> ids) const;

  // mean_pool over encode(vocab, text); throws EmptyInput on zero tokens.
  SentenceEmbedding embed(const Vocabulary& vocab, const std::string& text) const;

  // Text format: line 1 "V D", then V lines of D space-separated decimals.
  // Rendering round-trips 64-bit values exactly (shortest form).
  void save(const std::string& path) const;
  static EmbeddingTable load(const std::string& path);

 private:
  std::size_t vocab_size_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> weights_;
};

// <u,v> / (|u| |v|); returns 0.0 when either norm is below 1e-12.
double cosine(const SentenceEmbedding& u, const SentenceEmbedding& v);

double dot(const SentenceEmbedding& u, const SentenceEmbedding& v);

double similarity(SimilarityMetric metric, const SentenceEmbedding& u,
                  const SentenceEmbedding& v);

}  // namespace embedkit
