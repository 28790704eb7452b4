#include "embedkit/triplet.hpp"

#include <algorithm>
#include <cmath>

#include "embedkit/errors.hpp"

namespace embedkit {

void EvalConfig::validate() const {
  if (!std::isfinite(margin) || margin < 0.0) {
    throw ConfigError("margin must be finite and >= 0");
  }
}

Embedder make_embedder(const EmbeddingTable& table, const Vocabulary& vocab) {
  const EmbeddingTable* table_ptr = &table;
  const Vocabulary* vocab_ptr = &vocab;
  return [table_ptr, vocab_ptr](const std::string& text) {
    return table_ptr->embed(*vocab_ptr, text);
  };
}

TripletOutcome eval_triplet(const Embedder& embedder, const TripletRecord& triplet,
                            const EvalConfig& config) {
  config.validate();
  const auto anchor = embedder(triplet.anchor);
  const auto positive = embedder(triplet.positive);
  const auto negative = embedder(triplet.negative);
  TripletOutcome outcome;
  outcome.s_pos = similarity(config.metric, anchor, positive);
  outcome.s_neg = similarity(config.metric, anchor, negative);
  outcome.passed = outcome.s_pos > outcome.s_neg + config.margin;
  return outcome;
}

EvalReport evaluate(const Embedder& embedder, const TripletDataset& triplets,
                    const EvalConfig& config, bool keep_per_example) {
  config.validate();
  if (triplets.empty()) throw EmptyDataset("evaluate: no triplets");

  EvalReport report;
  report.total = triplets.size();
  report.margin = config.margin;
  report.metric = config.metric;
  if (keep_per_example) report.per_example.reserve(triplets.size());

  for (const auto& triplet : triplets) {
    const auto outcome = eval_triplet(embedder, triplet, config);
    if (outcome.passed) ++report.correct;
    if (keep_per_example) report.per_example.push_back(outcome);
  }
  report.accuracy_percent =
      100.0 * static_cast<double>(report.correct) / static_cast<double>(report.total);
  return report;
}

EvalReport oracle_evaluate(const Embedder& embedder, const TripletDataset& triplets,
                           const EvalConfig& config) {
  config.validate();
  if (triplets.empty()) throw EmptyDataset("oracle_evaluate: no triplets");

  std::size_t correct = 0;
  for (const auto& triplet : triplets) {
    const auto a = embedder(triplet.anchor);
    const auto p = embedder(triplet.positive);
    const auto n = embedder(triplet.negative);

    double s_pos = 0.0;
    double s_neg = 0.0;
    if (config.metric == SimilarityMetric::kDot) {
      for (std::size_t d = 0; d < a.size(); ++d) s_pos += a[d] * p[d];
      for (std::size_t d = 0; d < a.size(); ++d) s_neg += a[d] * n[d];
    } else {
      double dot_ap = 0.0, norm_a = 0.0, norm_p = 0.0;
      for (std::size_t d = 0; d < a.size(); ++d) {
        dot_ap += a[d] * p[d];
        norm_a += a[d] * a[d];
        norm_p += p[d] * p[d];
      }
      const double len_a = std::sqrt(norm_a);
      const double len_p = std::sqrt(norm_p);
      s_pos = (len_a < 1e-12 || len_p < 1e-12) ? 0.0 : dot_ap / (len_a * len_p);

      double dot_an = 0.0, norm_a2 = 0.0, norm_n = 0.0;
      for (std::size_t d = 0; d < a.size(); ++d) {
        dot_an += a[d] * n[d];
        norm_a2 += a[d] * a[d];
        norm_n += n[d] * n[d];
      }
      const double len_a2 = std::sqrt(norm_a2);
      const double len_n = std::sqrt(norm_n);
      s_neg = (len_a2 < 1e-12 || len_n < 1e-12) ? 0.0 : dot_an / (len_a2 * len_n);
    }

    if (s_pos > s_neg + config.margin) ++correct;
  }

  EvalReport report;
  report.total = triplets.size();
  report.correct = correct;
  report.accuracy_percent =
      100.0 * static_cast<double>(correct) / static_cast<double>(triplets.size());
  report.margin = config.margin;
  report.metric = config.metric;
  return report;
}

std::vector<std::pair<std::string, double>> similarity_probe(
    const Embedder& embedder, const std::string& query,
    const std::vector<std::pair<std::string, std::string>>& candidates,
    SimilarityMetric metric) {
  const auto query_embedding = embedder(query);
  std::vector<std::pair<std::string, double>> scored;
  scored.reserve(candidates.size());
  for (const auto& [name, text] : candidates) {
    scored.emplace_back(name, similarity(metric, query_embedding, embedder(text)));
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return scored;
}

}  // namespace embedkit
