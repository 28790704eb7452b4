#include "embedkit/kvconfig.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <system_error>

#include "embedkit/errors.hpp"

namespace embedkit {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

}  // namespace

std::vector<KvEntry> parse_kv_text(const std::string& text, const std::string& context) {
  std::vector<KvEntry> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(context + ": line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    KvEntry entry;
    entry.key = trim(stripped.substr(0, eq));
    entry.value = trim(stripped.substr(eq + 1));
    entry.line = line_no;
    if (entry.key.empty()) {
      throw ConfigError(context + ": line " + std::to_string(line_no) + ": empty key");
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<KvEntry> parse_kv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_kv_text(buffer.str(), path);
}

std::uint64_t parse_u64(const std::string& text, const std::string& context) {
  std::uint64_t value = 0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc{} || result.ptr != text.data() + text.size()) {
    throw ConfigError(context + ": expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

double parse_f64(const std::string& text, const std::string& context) {
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc{} || result.ptr != text.data() + text.size()) {
    throw ConfigError(context + ": expected a number, got '" + text + "'");
  }
  return value;
}

}  // namespace embedkit
