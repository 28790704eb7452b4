#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace embedkit {

inline constexpr const char* kToolVersion = "0.1.0";

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::uint64_t fnv1a64_string(const std::string& data);
std::uint64_t fnv1a64_file(const std::string& path);  // throws IoError
std::string to_hex64(std::uint64_t value);

struct ManifestInput {
  std::string path;
  std::string digest;  // fnv1a64 of the file bytes, 16 hex digits
};

// Provenance record written next to every command's primary output.
struct RunManifest {
  std::string command;
  std::string version = kToolVersion;
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, std::string>> config;  // resolved values
  std::vector<ManifestInput> inputs;
  std::vector<std::string> outputs;
  std::string started_at;   // ISO-8601 UTC
  std::string finished_at;

  void add_input(const std::string& path);  // digests the file
};

std::string now_iso8601_utc();

void save_manifest(const RunManifest& manifest, const std::string& path);
RunManifest load_manifest(const std::string& path);

// Recomputes every input digest; true when all match the recorded values.
bool verify_manifest_inputs(const RunManifest& manifest);

}  // namespace embedkit
