#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "embedkit/records.hpp"

namespace embedkit {

struct DiseaseEntry {
  std::string code;  // ICD-10 style identifier, unique within a list
  std::string name;
};

// UTF-8 TSV, one "code\tname" per line. Duplicate codes are rejected; an
// empty file is a valid empty list.
std::vector<DiseaseEntry> load_diseases(const std::string& path);

struct GenerationRequest {
  std::string template_id;
  std::string disease;        // disease name, never allowed in the output
  std::size_t max_length = 0; // token cap; 0 means no cap
};

struct GenerationResponse {
  std::string text;
  std::string provider;  // provider tag, e.g. "stub"
};

// Text generation backend. Implementations throw ProviderError on
// transport or format failures.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual GenerationResponse generate(const GenerationRequest& request) = 0;
  // Reset any internal variation stream; providers without one ignore it.
  virtual void reseed(std::uint64_t /*seed*/) {}
  virtual std::string name() const = 0;
};

// Offline deterministic provider: fills fixed symptom-style templates with
// words sampled from a built-in list, never emitting the disease name
// itself. Successive calls for the same (template_id, disease) vary, but the
// whole sequence is a pure function of the reseed value and call order.
// Template ids: "description" and "qa".
class StubProvider : public Provider {
 public:
  explicit StubProvider(std::uint64_t seed = 0);
  GenerationResponse generate(const GenerationRequest& request) override;
  void reseed(std::uint64_t seed) override;
  std::string name() const override { return "stub"; }

 private:
  std::uint64_t seed_;
  std::map<std::string, std::uint64_t> call_counts_;
};

struct ProviderConfig {
  std::string url;          // http endpoint, e.g. http://host:port/generate
  std::string token;        // optional bearer token
  int timeout_ms = 5000;
};

// Keys: provider.url (required), provider.token, provider.token_env (reads
// the named environment variable), provider.timeout_ms. Unknown keys error.
ProviderConfig load_provider_config(const std::string& path);

// POSTs {"template_id":..., "disease":..., "max_length":...} and expects
// {"text": ...} back. Defined in http_provider.cpp.
std::unique_ptr<Provider> make_http_provider(const ProviderConfig& config);

struct GenerationResult {
  PairDataset pairs;
  std::vector<std::string> warnings;  // one per skipped pair
  std::size_t skipped = 0;
};

// For every disease, per_disease pairs of (description, second description)
// with label = code. A text containing its own disease name is regenerated
// up to 3 times, then the pair is skipped with a warning. Transport/format
// failures get the same retry budget and then raise ProviderError with the
// disease code attached. Output order is (disease code, request index).
GenerationResult generate_pairs(const std::vector<DiseaseEntry>& diseases,
                                Provider& provider, const std::string& template_id,
                                std::size_t per_disease, std::uint64_t seed);

struct CleanStats {
  std::size_t kept = 0;
  std::size_t dropped_duplicate = 0;
  std::size_t dropped_name_leak = 0;
  std::size_t dropped_empty = 0;
};

struct CleanResult {
  PairDataset pairs;
  CleanStats stats;
};

// Drops exact duplicate (anchor, positive) pairs, rows whose resolved
// disease name leaks into anchor or positive (case-insensitive substring),
// and rows whose anchor or positive tokenizes to nothing. A label missing
// from `diseases` resolves to the label string itself. Idempotent;
// kept + dropped counts always equal the input size.
CleanResult clean(const PairDataset& pairs, const std::vector<DiseaseEntry>& diseases);

// Seeded Fisher-Yates shuffle, then a contiguous split. Fractions must be
// positive and sum to 1 within 1e-9.
std::pair<PairDataset, PairDataset> shuffle_split(const PairDataset& pairs,
                                                  std::uint64_t seed,
                                                  double train_fraction,
                                                  double eval_fraction);

// For each pair, draws negatives_per_pair negatives: the positive text of a
// uniformly sampled pair with a different label (seeded rejection sampling).
// Throws SingleLabel when only one label is present.
TripletDataset make_triplets(const PairDataset& pairs, std::uint64_t seed,
                             std::size_t negatives_per_pair);

}  // namespace embedkit
