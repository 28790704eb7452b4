#include "embedkit/records.hpp"

#include <cctype>
#include <fstream>

#include <json.hpp>

#include "embedkit/errors.hpp"
#include "embedkit/vocab.hpp"

namespace embedkit {

namespace {

using nlohmann::ordered_json;

std::string require_string(const ordered_json& obj, const char* key,
                           const std::string& context) {
  if (!obj.contains(key)) throw MalformedFile(context + ": missing key '" + key + "'");
  if (!obj.at(key).is_string()) {
    throw MalformedFile(context + ": key '" + std::string(key) + "' must be a string");
  }
  return obj.at(key).get<std::string>();
}

std::string optional_string(const ordered_json& obj, const char* key,
                            const std::string& context) {
  if (!obj.contains(key)) return {};
  if (!obj.at(key).is_string()) {
    throw MalformedFile(context + ": key '" + std::string(key) + "' must be a string");
  }
  return obj.at(key).get<std::string>();
}

ordered_json parse_line(const std::string& line, const std::string& context) {
  ordered_json obj;
  try {
    obj = ordered_json::parse(line);
  } catch (const ordered_json::parse_error& e) {
    throw MalformedFile(context + ": invalid JSON: " + e.what());
  }
  if (!obj.is_object()) throw MalformedFile(context + ": expected a JSON object");
  return obj;
}

template <typename Fn>
void for_each_jsonl_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    fn(line, line_no);
  }
}

}  // namespace

std::string normalize_whitespace(const std::string& text) {
  std::string out;
  bool pending_space = false;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(ch);
  }
  return out;
}

void save_pairs(const PairDataset& pairs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const auto& pair : pairs) {
    ordered_json obj{{"anchor", pair.anchor}, {"positive", pair.positive}, {"label", pair.label}};
    if (!pair.source_id.empty()) obj["source_id"] = pair.source_id;
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

PairDataset load_pairs(const std::string& path) {
  PairDataset pairs;
  for_each_jsonl_line(path, [&](const std::string& line, std::size_t line_no) {
    const std::string context = path + ": line " + std::to_string(line_no);
    const auto obj = parse_line(line, context);
    PairRecord record;
    record.anchor = require_string(obj, "anchor", context);
    record.positive = require_string(obj, "positive", context);
    record.label = require_string(obj, "label", context);
    record.source_id = optional_string(obj, "source_id", context);
    if (record.anchor.empty() || record.positive.empty() || record.label.empty()) {
      throw MalformedFile(context + ": anchor, positive and label must be non-empty");
    }
    if (normalize_whitespace(record.anchor) == normalize_whitespace(record.positive)) {
      throw MalformedFile(context + ": anchor equals positive");
    }
    pairs.push_back(std::move(record));
  });
  return pairs;
}

void save_triplets(const TripletDataset& triplets, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const auto& triplet : triplets) {
    ordered_json obj{{"anchor", triplet.anchor},
                     {"positive", triplet.positive},
                     {"negative", triplet.negative}};
    if (!triplet.anchor_label.empty()) obj["anchor_label"] = triplet.anchor_label;
    if (!triplet.negative_label.empty()) obj["negative_label"] = triplet.negative_label;
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

TripletDataset load_triplets(const std::string& path) {
  TripletDataset triplets;
  for_each_jsonl_line(path, [&](const std::string& line, std::size_t line_no) {
    const std::string context = path + ": line " + std::to_string(line_no);
    const auto obj = parse_line(line, context);
    TripletRecord record;
    record.anchor = require_string(obj, "anchor", context);
    record.positive = require_string(obj, "positive", context);
    record.negative = require_string(obj, "negative", context);
    record.anchor_label = optional_string(obj, "anchor_label", context);
    record.negative_label = optional_string(obj, "negative_label", context);
    if (tokenize(record.anchor).empty() || tokenize(record.positive).empty() ||
        tokenize(record.negative).empty()) {
      throw MalformedFile(context + ": anchor, positive and negative must tokenize to >= 1 token");
    }
    triplets.push_back(std::move(record));
  });
  return triplets;
}

}  // namespace embedkit
