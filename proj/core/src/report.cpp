#include "embedkit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "embedkit/errors.hpp"

namespace embedkit {

namespace {

using nlohmann::ordered_json;

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

}  // namespace

ReportRow make_report_row(const std::string& model, const std::string& dataset,
                          const EvalReport& report) {
  ReportRow row;
  row.model = model;
  row.dataset = dataset;
  row.accuracy_percent = report.accuracy_percent;
  row.total = report.total;
  row.correct = report.correct;
  row.margin = report.margin;
  row.metric = report.metric;
  return row;
}

std::vector<ReportRow> compare_models(
    const std::vector<std::pair<std::string, Embedder>>& models,
    const std::vector<std::pair<std::string, TripletDataset>>& datasets,
    const EvalConfig& config) {
  if (models.empty()) throw InvalidArgument("compare_models: no models");
  if (datasets.empty()) throw InvalidArgument("compare_models: no datasets");
  std::vector<ReportRow> rows;
  rows.reserve(models.size() * datasets.size());
  for (const auto& [model_name, embedder] : models) {
    for (const auto& [dataset_name, triplets] : datasets) {
      rows.push_back(
          make_report_row(model_name, dataset_name, evaluate(embedder, triplets, config)));
    }
  }
  return rows;
}

std::string render_text_report(std::span<const ReportRow> rows) {
  std::size_t model_width = 5, dataset_width = 7;
  for (const auto& row : rows) {
    model_width = std::max(model_width, row.model.size());
    dataset_width = std::max(dataset_width, row.dataset.size());
  }
  std::string out;
  auto pad = [](const std::string& s, std::size_t width) {
    return s + std::string(width - s.size() + 2, ' ');
  };
  out += pad("model", model_width) + pad("dataset", dataset_width) +
         "accuracy  correct/total  margin  metric\n";
  for (const auto& row : rows) {
    out += pad(row.model, model_width) + pad(row.dataset, dataset_width) +
           format_fixed(row.accuracy_percent, 2) + "    " + std::to_string(row.correct) +
           "/" + std::to_string(row.total) + "  " + format_fixed(row.margin, 4) + "  " +
           metric_name(row.metric) + "\n";
  }
  return out;
}

void write_report_jsonl(std::span<const ReportRow> rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const auto& row : rows) {
    ordered_json obj{{"model", row.model},
                     {"dataset", row.dataset},
                     {"accuracy_percent", row.accuracy_percent},
                     {"total", row.total},
                     {"correct", row.correct},
                     {"margin", row.margin},
                     {"metric", metric_name(row.metric)}};
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<ReportRow> load_report_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::vector<ReportRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string context = path + ": line " + std::to_string(line_no);
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const ordered_json::parse_error& e) {
      throw MalformedFile(context + ": invalid JSON: " + e.what());
    }
    try {
      ReportRow row;
      row.model = obj.at("model").get<std::string>();
      row.dataset = obj.at("dataset").get<std::string>();
      row.accuracy_percent = obj.at("accuracy_percent").get<double>();
      row.total = obj.at("total").get<std::size_t>();
      row.correct = obj.at("correct").get<std::size_t>();
      row.margin = obj.at("margin").get<double>();
      row.metric = parse_metric(obj.at("metric").get<std::string>());
      rows.push_back(std::move(row));
    } catch (const ordered_json::exception& e) {
      throw MalformedFile(context + ": " + e.what());
    }
  }
  return rows;
}

std::string merge_reports_markdown(std::span<const ReportRow> rows) {
  if (rows.empty()) throw InvalidArgument("merge: no report rows");

  std::vector<std::string> models, datasets;
  std::map<std::pair<std::string, std::string>, const ReportRow*> cells;
  for (const auto& row : rows) {
    if (std::find(models.begin(), models.end(), row.model) == models.end()) {
      models.push_back(row.model);
    }
    if (std::find(datasets.begin(), datasets.end(), row.dataset) == datasets.end()) {
      datasets.push_back(row.dataset);
    }
    const auto key = std::make_pair(row.model, row.dataset);
    const auto [it, inserted] = cells.emplace(key, &row);
    if (!inserted) {
      const ReportRow& prev = *it->second;
      if (prev.correct != row.correct || prev.total != row.total) {
        throw MalformedFile("conflicting duplicate cell for model '" + row.model +
                            "', dataset '" + row.dataset + "'");
      }
    }
  }

  std::string out = "| model |";
  for (const auto& dataset : datasets) out += " " + dataset + " |";
  out += "\n| --- |";
  for (std::size_t i = 0; i < datasets.size(); ++i) out += " --- |";
  out += "\n";
  for (const auto& model : models) {
    out += "| " + model + " |";
    for (const auto& dataset : datasets) {
      const auto it = cells.find({model, dataset});
      out += it == cells.end() ? " - |"
                               : " " + format_fixed(it->second->accuracy_percent, 1) + " |";
    }
    out += "\n";
  }
  return out;
}

}  // namespace embedkit
