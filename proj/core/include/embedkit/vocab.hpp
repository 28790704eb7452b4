#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace embedkit {

using TokenId = std::uint32_t;

inline constexpr TokenId kUnkId = 0;
inline constexpr const char* kUnkToken = "<unk>";

// Lowercases, replaces `.,;:!?()[]{}"'/\` and whitespace with separators,
// splits, drops empty segments. Bytes >= 0x80 pass through untouched.
std::vector<std::string> tokenize(const std::string& text);

// Token -> dense id map with "<unk>" pinned at id 0. Immutable once built;
// concurrent reads are safe.
class Vocabulary {
 public:
  // Tokens with corpus frequency >= min_freq get ids assigned by descending
  // frequency, ties broken lexicographically. Throws EmptyCorpus /
  // EmptyVocabulary.
  static Vocabulary build(const std::vector<std::string>& corpus,
                          std::uint64_t min_freq);

  std::size_t size() const { return id_to_token_.size(); }

  // unk_id for tokens not in the vocabulary.
  TokenId id_of(const std::string& token) const;
  const std::string& token_of(TokenId id) const;  // throws IdOutOfRange
  bool contains(const std::string& token) const;
  std::uint64_t frequency_of(TokenId id) const;   // throws IdOutOfRange

  std::uint64_t min_freq() const { return min_freq_; }

  // Line k+1 holds "<token>\t<frequency>" for id k; line 1 is "<unk>\t0".
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  Vocabulary() = default;

  std::unordered_map<std::string, TokenId> token_to_id_;
  std::vector<std::string> id_to_token_;
  std::vector<std::uint64_t> frequencies_;
  std::uint64_t min_freq_ = 1;
};

// tokenize + per-token lookup with unk fallback. Never yields an id >= size.
std::vector<TokenId> encode(const Vocabulary& vocab, const std::string& text);

}  // namespace embedkit
