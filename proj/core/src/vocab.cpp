#include "embedkit/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "embedkit/errors.hpp"

namespace embedkit {

namespace {

bool is_separator(unsigned char c) {
  static const std::string strip = ".,;:!?()[]{}\"'/\\";
  return std::isspace(c) || strip.find(static_cast<char>(c)) != std::string::npos;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && is_separator(c)) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
      continue;
    }
    current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus,
                             std::uint64_t min_freq) {
  if (corpus.empty()) throw EmptyCorpus("vocabulary build: corpus has no documents");
  if (min_freq < 1) throw InvalidArgument("vocabulary build: min_freq must be >= 1");

  std::map<std::string, std::uint64_t> counts;
  for (const auto& doc : corpus) {
    for (auto& token : tokenize(doc)) {
      // A literal "<unk>" in the corpus collapses into the sentinel slot.
      if (token == kUnkToken) continue;
      ++counts[token];
    }
  }

  std::vector<std::pair<std::string, std::uint64_t>> kept;
  kept.reserve(counts.size());
  for (auto& [token, freq] : counts) {
    if (freq >= min_freq) kept.emplace_back(token, freq);
  }
  if (kept.empty()) throw EmptyVocabulary("vocabulary build: no token met min_freq");

  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  vocab.min_freq_ = min_freq;
  vocab.id_to_token_.reserve(kept.size() + 1);
  vocab.frequencies_.reserve(kept.size() + 1);
  vocab.id_to_token_.emplace_back(kUnkToken);
  vocab.frequencies_.push_back(0);
  vocab.token_to_id_.emplace(kUnkToken, kUnkId);
  for (auto& [token, freq] : kept) {
    const auto id = static_cast<TokenId>(vocab.id_to_token_.size());
    vocab.token_to_id_.emplace(token, id);
    vocab.id_to_token_.push_back(std::move(token));
    vocab.frequencies_.push_back(freq);
  }
  return vocab;
}

TokenId Vocabulary::id_of(const std::string& token) const {
  const auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token_of(TokenId id) const {
  if (id >= id_to_token_.size()) {
    throw IdOutOfRange("token_of: id " + std::to_string(id) + " >= vocabulary size " +
                       std::to_string(id_to_token_.size()));
  }
  return id_to_token_[id];
}

bool Vocabulary::contains(const std::string& token) const {
  return token_to_id_.count(token) != 0;
}

std::uint64_t Vocabulary::frequency_of(TokenId id) const {
  if (id >= frequencies_.size()) {
    throw IdOutOfRange("frequency_of: id " + std::to_string(id) + " out of range");
  }
  return frequencies_[id];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (std::size_t id = 0; id < id_to_token_.size(); ++id) {
    out << id_to_token_[id] << '\t' << frequencies_[id] << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);

  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw MalformedFile(path + ": line " + std::to_string(line_no) + ": missing tab");
    }
    std::string token = line.substr(0, tab);
    const std::string freq_str = line.substr(tab + 1);
    std::uint64_t freq = 0;
    const auto parsed =
        std::from_chars(freq_str.data(), freq_str.data() + freq_str.size(), freq);
    if (parsed.ec != std::errc{} || parsed.ptr != freq_str.data() + freq_str.size()) {
      throw MalformedFile(path + ": line " + std::to_string(line_no) +
                          ": bad frequency '" + freq_str + "'");
    }
    if (line_no == 1 && token != kUnkToken) {
      throw MalformedFile(path + ": line 1 must be the <unk> entry");
    }
    const auto id = static_cast<TokenId>(vocab.id_to_token_.size());
    if (!vocab.token_to_id_.emplace(token, id).second) {
      throw MalformedFile(path + ": line " + std::to_string(line_no) +
                          ": duplicate token '" + token + "'");
    }
    vocab.id_to_token_.push_back(std::move(token));
    vocab.frequencies_.push_back(freq);
  }
  if (vocab.id_to_token_.empty()) throw MalformedFile(path + ": empty vocabulary file");
  return vocab;
}

std::vector<TokenId> encode(const Vocabulary& vocab, const std::string& text) {
  std::vector<TokenId> ids;
  for (const auto& token : tokenize(text)) {
    ids.push_back(vocab.id_of(token));
  }
  return ids;
}

}  // namespace embedkit
