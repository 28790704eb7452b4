#include "embedkit/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "embedkit/errors.hpp"
#include "embedkit/kvconfig.hpp"
#include "embedkit/rng.hpp"
#include "embedkit/vocab.hpp"

namespace embedkit {

namespace {

std::string to_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool contains_case_insensitive(const std::string& haystack, const std::string& needle) {
  if (needle.empty()) return false;
  return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

// Symptom-flavored filler vocabulary for the offline stub. None of these
// words may ever be a full disease name match only by accident; the leak
// check still runs on top.
const std::vector<std::string>& stub_words() {
  static const std::vector<std::string> words = {
      "persistent", "intermittent", "gradual",   "sudden",    "localized", "diffuse",
      "aching",     "stabbing",     "burning",   "throbbing", "swelling",  "stiffness",
      "fatigue",    "weakness",     "dizziness", "nausea",    "tingling",  "numbness",
      "tenderness", "discomfort",   "pressure",  "cramping",  "soreness",  "irritation",
      "episodes",   "flareups",     "onset",     "worsening", "recurring", "mild",
      "moderate",   "severe",       "chronic",   "acute",     "morning",   "evening",
      "rest",       "exertion",     "appetite",  "sleep"};
  return words;
}

}  // namespace

std::vector<DiseaseEntry> load_diseases(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);

  std::vector<DiseaseEntry> entries;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      throw MalformedLine(path + ": line " + std::to_string(line_no) +
                          ": expected 'code\\tname'");
    }
    DiseaseEntry entry;
    entry.code = line.substr(0, tab);
    entry.name = line.substr(tab + 1);
    if (!seen.insert(entry.code).second) {
      throw DuplicateCode(path + ": line " + std::to_string(line_no) +
                          ": duplicate code '" + entry.code + "'");
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

StubProvider::StubProvider(std::uint64_t seed) : seed_(seed) {}

void StubProvider::reseed(std::uint64_t seed) {
  seed_ = seed;
  call_counts_.clear();
}

GenerationResponse StubProvider::generate(const GenerationRequest& request) {
  if (request.template_id != "description" && request.template_id != "qa") {
    throw ProviderError("stub: unknown template_id '" + request.template_id + "'");
  }
  if (request.disease.empty()) throw ProviderError("stub: empty disease name");

  const std::string key = request.template_id + "\x1f" + request.disease;
  const std::uint64_t call_index = call_counts_[key]++;

  // Derive a stream from (seed, disease, template, call index) so every text
  // differs but the whole sequence replays exactly.
  std::uint64_t h = seed_ ^ 0x5bd1e9955bd1e995ULL;
  for (const char c : key) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  h ^= call_index * 0x9e3779b97f4a7c15ULL;
  Rng rng(h);

  const auto& words = stub_words();
  const std::size_t body_len = 6 + rng.next_below(6);
  std::string body;
  for (std::size_t i = 0; i < body_len; ++i) {
    if (i) body += i % 3 == 2 ? " and " : " ";
    body += words[rng.next_below(words.size())];
  }

  std::string text;
  if (request.template_id == "description") {
    text = "patient reports " + body + " over recent weeks";
  } else {
    text = "what explains " + body + "? these findings commonly appear together";
  }

  if (request.max_length > 0) {
    const auto tokens = tokenize(text);
    if (tokens.size() > request.max_length) {
      text.clear();
      for (std::size_t i = 0; i < request.max_length; ++i) {
        if (i) text += ' ';
        text += tokens[i];
      }
    }
  }
  return {text, name()};
}

ProviderConfig load_provider_config(const std::string& path) {
  ProviderConfig config;
  std::string token_env;
  for (const auto& entry : parse_kv_file(path)) {
    const std::string context = path + ": line " + std::to_string(entry.line);
    if (entry.key == "provider.url") {
      config.url = entry.value;
    } else if (entry.key == "provider.token") {
      config.token = entry.value;
    } else if (entry.key == "provider.token_env") {
      token_env = entry.value;
    } else if (entry.key == "provider.timeout_ms") {
      const auto timeout = parse_u64(entry.value, context);
      if (timeout == 0 || timeout > 600000) {
        throw ConfigError(context + ": provider.timeout_ms must be in (0, 600000]");
      }
      config.timeout_ms = static_cast<int>(timeout);
    } else {
      throw ConfigError(context + ": unknown key '" + entry.key + "'");
    }
  }
  if (config.url.empty()) throw ConfigError(path + ": provider.url is required");
  if (!token_env.empty()) {
    const char* value = std::getenv(token_env.c_str());
    if (value != nullptr) config.token = value;
  }
  return config;
}

GenerationResult generate_pairs(const std::vector<DiseaseEntry>& diseases,
                                Provider& provider, const std::string& template_id,
                                std::size_t per_disease, std::uint64_t seed) {
  if (per_disease < 1) throw InvalidArgument("generate_pairs: per_disease must be >= 1");
  provider.reseed(seed);

  std::vector<DiseaseEntry> ordered = diseases;
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.code < b.code; });

  constexpr int kRetries = 3;
  GenerationResult result;

  // Attempts one text; returns empty optional when the retry budget is
  // exhausted by name leaks. Transport/format failures past the budget throw.
  auto generate_text = [&](const DiseaseEntry& disease, const std::string& tmpl,
                           const std::string& reject_text) -> std::string {
    std::string last_error;
    bool leaked = false;
    for (int attempt = 0; attempt <= kRetries; ++attempt) {
      GenerationResponse response;
      try {
        response = provider.generate({tmpl, disease.name, 0});
      } catch (const ProviderError& e) {
        last_error = e.what();
        leaked = false;
        continue;
      }
      if (response.text.empty()) {
        last_error = "provider returned empty text";
        leaked = false;
        continue;
      }
      if (contains_case_insensitive(response.text, disease.name)) {
        leaked = true;
        continue;
      }
      if (!reject_text.empty() &&
          normalize_whitespace(response.text) == normalize_whitespace(reject_text)) {
        leaked = true;  // treated like a failed sample: retry, then skip
        continue;
      }
      return response.text;
    }
    if (leaked) return {};
    throw ProviderError("disease " + disease.code + ": " + last_error);
  };

  for (const auto& disease : ordered) {
    for (std::size_t k = 0; k < per_disease; ++k) {
      const std::string anchor = generate_text(disease, template_id, {});
      if (anchor.empty()) {
        result.warnings.push_back("disease " + disease.code + " pair " + std::to_string(k) +
                                  ": rejected-output retries exhausted, skipped");
        ++result.skipped;
        continue;
      }
      const std::string positive = generate_text(disease, template_id, anchor);
      if (positive.empty()) {
        result.warnings.push_back("disease " + disease.code + " pair " + std::to_string(k) +
                                  ": rejected-output retries exhausted, skipped");
        ++result.skipped;
        continue;
      }
      PairRecord record;
      record.anchor = anchor;
      record.positive = positive;
      record.label = disease.code;
      record.source_id = provider.name() + "/" + disease.code + "/" + std::to_string(k);
      result.pairs.push_back(std::move(record));
    }
  }
  return result;
}

CleanResult clean(const PairDataset& pairs, const std::vector<DiseaseEntry>& diseases) {
  std::unordered_map<std::string, std::string> name_of;
  for (const auto& disease : diseases) name_of.emplace(disease.code, disease.name);

  CleanResult result;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& pair : pairs) {
    if (!seen.emplace(pair.anchor, pair.positive).second) {
      ++result.stats.dropped_duplicate;
      continue;
    }
    const auto it = name_of.find(pair.label);
    const std::string& disease_name = it != name_of.end() ? it->second : pair.label;
    if (contains_case_insensitive(pair.anchor, disease_name) ||
        contains_case_insensitive(pair.positive, disease_name)) {
      ++result.stats.dropped_name_leak;
      continue;
    }
    if (tokenize(pair.anchor).empty() || tokenize(pair.positive).empty()) {
      ++result.stats.dropped_empty;
      continue;
    }
    result.pairs.push_back(pair);
    ++result.stats.kept;
  }
  return result;
}

std::pair<PairDataset, PairDataset> shuffle_split(const PairDataset& pairs,
                                                  std::uint64_t seed,
                                                  double train_fraction,
                                                  double eval_fraction) {
  if (!(train_fraction > 0.0) || !(eval_fraction > 0.0) ||
      std::abs(train_fraction + eval_fraction - 1.0) > 1e-9) {
    throw BadFractions("fractions must be positive and sum to 1");
  }
  PairDataset shuffled = pairs;
  Rng rng(seed);
  shuffle(shuffled, rng);

  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(shuffled.size())));
  PairDataset train_set(shuffled.begin(), shuffled.begin() + std::min(n_train, shuffled.size()));
  PairDataset eval_set(shuffled.begin() + train_set.size(), shuffled.end());
  return {std::move(train_set), std::move(eval_set)};
}

TripletDataset make_triplets(const PairDataset& pairs, std::uint64_t seed,
                             std::size_t negatives_per_pair) {
  if (negatives_per_pair < 1) {
    throw InvalidArgument("make_triplets: negatives_per_pair must be >= 1");
  }
  std::set<std::string> labels;
  for (const auto& pair : pairs) labels.insert(pair.label);
  if (labels.size() < 2) {
    throw SingleLabel("make_triplets: need >= 2 distinct labels, got " +
                      std::to_string(labels.size()));
  }

  Rng rng(seed);
  TripletDataset triplets;
  triplets.reserve(pairs.size() * negatives_per_pair);
  for (const auto& pair : pairs) {
    for (std::size_t k = 0; k < negatives_per_pair; ++k) {
      std::size_t idx;
      do {
        idx = static_cast<std::size_t>(rng.next_below(pairs.size()));
      } while (pairs[idx].label == pair.label);
      TripletRecord triplet;
      triplet.anchor = pair.anchor;
      triplet.positive = pair.positive;
      triplet.negative = pairs[idx].positive;
      triplet.anchor_label = pair.label;
      triplet.negative_label = pairs[idx].label;
      triplets.push_back(std::move(triplet));
    }
  }
  return triplets;
}

}  // namespace embedkit
