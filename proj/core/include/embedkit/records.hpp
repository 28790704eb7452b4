#pragma once

#include <string>
#include <vector>

namespace embedkit {

// One training example: a disease description or symptom text paired with a
// matching text for the same disease.
struct PairRecord {
  std::string anchor;
  std::string positive;
  std::string label;      // disease identifier, e.g. an ICD-10 style code
  std::string source_id;  // optional provenance tag
};

using PairDataset = std::vector<PairRecord>;

// One evaluation example: the negative comes from a different disease.
struct TripletRecord {
  std::string anchor;
  std::string positive;
  std::string negative;
  std::string anchor_label;    // optional
  std::string negative_label;  // optional
};

using TripletDataset = std::vector<TripletRecord>;

// Collapses whitespace runs to single spaces and trims the ends. Used for
// the anchor != positive check.
std::string normalize_whitespace(const std::string& text);

// JSON-lines, keys anchor/positive/label plus optional source_id. Load
// validates the record invariants and reports the offending line number.
void save_pairs(const PairDataset& pairs, const std::string& path);
PairDataset load_pairs(const std::string& path);

// JSON-lines, keys anchor/positive/negative plus optional anchor_label /
// negative_label. All three texts must be non-empty after tokenization.
void save_triplets(const TripletDataset& triplets, const std::string& path);
TripletDataset load_triplets(const std::string& path);

}  // namespace embedkit
