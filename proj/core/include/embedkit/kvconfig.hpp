#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace embedkit {

struct KvEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// "key = value" per line; blank lines and lines starting with '#' are
// ignored. Keys and values are trimmed. Throws IoError / ConfigError.
std::vector<KvEntry> parse_kv_file(const std::string& path);
std::vector<KvEntry> parse_kv_text(const std::string& text, const std::string& context);

// Whole-string numeric parsers; reject sign wrap-around and trailing junk.
// Throw ConfigError naming `context` on failure.
std::uint64_t parse_u64(const std::string& text, const std::string& context);
double parse_f64(const std::string& text, const std::string& context);

}  // namespace embedkit
