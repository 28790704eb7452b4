#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "embedkit/embedding.hpp"
#include "embedkit/records.hpp"

namespace embedkit {

struct EvalConfig {
  double margin = 0.0;
  SimilarityMetric metric = SimilarityMetric::kCosine;

  void validate() const;  // margin must be finite and >= 0
};

struct TripletOutcome {
  double s_pos = 0.0;
  double s_neg = 0.0;
  bool passed = false;  // s_pos > s_neg + margin, strictly
};

struct EvalReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy_percent = 0.0;  // 100 * correct / total
  double margin = 0.0;
  SimilarityMetric metric = SimilarityMetric::kCosine;
  std::vector<TripletOutcome> per_example;  // populated on request only
};

using Embedder = std::function<SentenceEmbedding(const std::string&)>;

// Embeds via mean pooling over the table. The table and vocabulary must
// outlive the returned callable.
Embedder make_embedder(const EmbeddingTable& table, const Vocabulary& vocab);

TripletOutcome eval_triplet(const Embedder& embedder, const TripletRecord& triplet,
                            const EvalConfig& config);

EvalReport evaluate(const Embedder& embedder, const TripletDataset& triplets,
                    const EvalConfig& config, bool keep_per_example = false);

// Straight-line re-implementation used as a cross-check: embeds through the
// same callable but computes similarities and counts with its own inline
// arithmetic, sharing none of the evaluate()/cosine()/dot() code path. Must
// agree with evaluate() on the exact correct-count for every dataset.
EvalReport oracle_evaluate(const Embedder& embedder, const TripletDataset& triplets,
                           const EvalConfig& config);

// Scores every candidate against the query and sorts descending; equal
// scores keep their input order.
std::vector<std::pair<std::string, double>> similarity_probe(
    const Embedder& embedder, const std::string& query,
    const std::vector<std::pair<std::string, std::string>>& candidates,
    SimilarityMetric metric);

}  // namespace embedkit
