#include "embedkit/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "embedkit/errors.hpp"

namespace embedkit {

namespace {

using nlohmann::ordered_json;

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

}  // namespace

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t hash = kFnvOffset;
  for (const unsigned char b : bytes) {
    hash ^= b;
    hash *= kFnvPrime;
  }
  return hash;
}

std::uint64_t fnv1a64_string(const std::string& data) {
  return fnv1a64({reinterpret_cast<const unsigned char*>(data.data()), data.size()});
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::uint64_t hash = kFnvOffset;
  char buffer[1 << 16];
  while (in.read(buffer, sizeof buffer) || in.gcount() > 0) {
    const auto count = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < count; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= kFnvPrime;
    }
  }
  return hash;
}

std::string to_hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

void RunManifest::add_input(const std::string& path) {
  inputs.push_back({path, to_hex64(fnv1a64_file(path))});
}

std::string now_iso8601_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

void save_manifest(const RunManifest& manifest, const std::string& path) {
  ordered_json obj;
  obj["command"] = manifest.command;
  obj["version"] = manifest.version;
  if (manifest.seed.has_value()) obj["seed"] = *manifest.seed;
  ordered_json config = ordered_json::object();
  for (const auto& [key, value] : manifest.config) config[key] = value;
  obj["config"] = config;
  ordered_json inputs = ordered_json::array();
  for (const auto& input : manifest.inputs) {
    inputs.push_back({{"path", input.path}, {"fnv1a64", input.digest}});
  }
  obj["inputs"] = inputs;
  obj["outputs"] = manifest.outputs;
  obj["started_at"] = manifest.started_at;
  obj["finished_at"] = manifest.finished_at;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << obj.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  ordered_json obj;
  try {
    in >> obj;
  } catch (const ordered_json::parse_error& e) {
    throw MalformedFile(path + ": invalid JSON: " + e.what());
  }
  try {
    RunManifest manifest;
    manifest.command = obj.at("command").get<std::string>();
    manifest.version = obj.at("version").get<std::string>();
    if (obj.contains("seed")) manifest.seed = obj.at("seed").get<std::uint64_t>();
    for (const auto& [key, value] : obj.at("config").items()) {
      manifest.config.emplace_back(key, value.get<std::string>());
    }
    for (const auto& input : obj.at("inputs")) {
      manifest.inputs.push_back({input.at("path").get<std::string>(),
                                 input.at("fnv1a64").get<std::string>()});
    }
    for (const auto& output : obj.at("outputs")) {
      manifest.outputs.push_back(output.get<std::string>());
    }
    manifest.started_at = obj.at("started_at").get<std::string>();
    manifest.finished_at = obj.at("finished_at").get<std::string>();
    return manifest;
  } catch (const ordered_json::exception& e) {
    throw MalformedFile(path + ": " + e.what());
  }
}

bool verify_manifest_inputs(const RunManifest& manifest) {
  for (const auto& input : manifest.inputs) {
    if (to_hex64(fnv1a64_file(input.path)) != input.digest) return false;
  }
  return true;
}

}  // namespace embedkit
