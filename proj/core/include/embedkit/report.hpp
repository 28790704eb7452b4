#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "embedkit/triplet.hpp"

namespace embedkit {

// One (model, dataset) accuracy cell, the unit of every report format.
struct ReportRow {
  std::string model;
  std::string dataset;
  double accuracy_percent = 0.0;
  std::size_t total = 0;
  std::size_t correct = 0;
  double margin = 0.0;
  SimilarityMetric metric = SimilarityMetric::kCosine;
};

// Evaluates every model on every dataset; row order is models outer,
// datasets inner, both in input order.
std::vector<ReportRow> compare_models(
    const std::vector<std::pair<std::string, Embedder>>& models,
    const std::vector<std::pair<std::string, TripletDataset>>& datasets,
    const EvalConfig& config);

ReportRow make_report_row(const std::string& model, const std::string& dataset,
                          const EvalReport& report);

// Fixed-width plain-text listing, one row per cell.
std::string render_text_report(std::span<const ReportRow> rows);

// JSON-lines with keys model, dataset, accuracy_percent, total, correct,
// margin, metric.
void write_report_jsonl(std::span<const ReportRow> rows, const std::string& path);
std::vector<ReportRow> load_report_jsonl(const std::string& path);

// Markdown table, rows = models, columns = datasets, accuracy to 1 decimal;
// "-" where a (model, dataset) cell is missing. Duplicate cells must agree
// on the correct count or this throws MalformedFile.
std::string merge_reports_markdown(std::span<const ReportRow> rows);

}  // namespace embedkit
