#include "embedkit/embedding.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "embedkit/errors.hpp"
#include "embedkit/rng.hpp"

namespace embedkit {

namespace {

constexpr double kNormFloor = 1e-12;

void append_double(std::string& out, double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& context) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw MalformedFile(context + ": bad number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

SimilarityMetric parse_metric(const std::string& name) {
  if (name == "cosine") return SimilarityMetric::kCosine;
  if (name == "dot") return SimilarityMetric::kDot;
  throw ConfigError("unknown similarity metric '" + name + "' (expected cosine or dot)");
}

std::string metric_name(SimilarityMetric metric) {
  return metric == SimilarityMetric::kCosine ? "cosine" : "dot";
}

EmbeddingTable::EmbeddingTable(std::size_t vocab_size, std::size_t dim,
                               std::vector<double> weights)
    : vocab_size_(vocab_size), dim_(dim), weights_(std::move(weights)) {
  if (vocab_size_ == 0 || dim_ == 0) {
    throw InvalidShape("embedding table: vocab_size and dim must be >= 1");
  }
  if (weights_.size() != vocab_size_ * dim_) {
    throw InvalidShape("embedding table: weight count " + std::to_string(weights_.size()) +
                       " != " + std::to_string(vocab_size_) + " x " + std::to_string(dim_));
  }
}

EmbeddingTable EmbeddingTable::init(std::size_t vocab_size, std::size_t dim,
                                    std::uint64_t seed) {
  if (vocab_size == 0 || dim == 0) {
    throw InvalidShape("embedding table init: vocab_size and dim must be >= 1");
  }
  const double bound = 0.5 / static_cast<double>(dim);
  Rng rng(seed);
  std::vector<double> weights(vocab_size * dim);
  for (auto& w : weights) w = rng.next_double(-bound, bound);
  EmbeddingTable table(vocab_size, dim, std::move(weights));
  table.check_finite();
  return table;
}

std::span<const double> EmbeddingTable::row(std::size_t i) const {
  if (i >= vocab_size_) {
    throw IdOutOfRange("row " + std::to_string(i) + " >= vocab_size " +
                       std::to_string(vocab_size_));
  }
  return {weights_.data() + i * dim_, dim_};
}

std::span<double> EmbeddingTable::mutable_row(std::size_t i) {
  if (i >= vocab_size_) {
    throw IdOutOfRange("row " + std::to_string(i) + " >= vocab_size " +
                       std::to_string(vocab_size_));
  }
  return {weights_.data() + i * dim_, dim_};
}

void EmbeddingTable::check_finite() const {
  for (const double w : weights_) {
    if (!std::isfinite(w)) throw NonFinite("embedding table contains a non-finite entry");
  }
}

SentenceEmbedding EmbeddingTable::mean_pool(std::span<const TokenId> ids) const {
  if (ids.empty()) throw EmptyInput("mean_pool: no token ids");
  SentenceEmbedding pooled(dim_, 0.0);
  for (const TokenId id : ids) {
    if (id >= vocab_size_) {
      throw IdOutOfRange("mean_pool: id " + std::to_string(id) + " >= vocab_size " +
                         std::to_string(vocab_size_));
    }
    const double* row = weights_.data() + static_cast<std::size_t>(id) * dim_;
    for (std::size_t d = 0; d < dim_; ++d) pooled[d] += row[d];
  }
  const double inv_n = 1.0 / static_cast<double>(ids.size());
  for (double& v : pooled) v *= inv_n;
  return pooled;
}

SentenceEmbedding EmbeddingTable::embed(const Vocabulary& vocab,
                                        const std::string& text) const {
  const auto ids = encode(vocab, text);
  if (ids.empty()) throw EmptyInput("embed: text has no tokens: '" + text + "'");
  return mean_pool(ids);
}

void EmbeddingTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  std::string buffer;
  buffer.reserve(dim_ * 24);
  out << vocab_size_ << ' ' << dim_ << '\n';
  for (std::size_t i = 0; i < vocab_size_; ++i) {
    buffer.clear();
    for (std::size_t d = 0; d < dim_; ++d) {
      if (d) buffer.push_back(' ');
      append_double(buffer, weights_[i * dim_ + d]);
    }
    buffer.push_back('\n');
    out << buffer;
  }
  if (!out) throw IoError("write failed: " + path);
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);

  std::string line;
  if (!std::getline(in, line)) throw MalformedFile(path + ": missing header line");
  std::istringstream header(line);
  long long v = 0, d = 0;
  if (!(header >> v >> d) || v <= 0 || d <= 0) {
    throw MalformedFile(path + ": header must be 'V D' with positive counts");
  }
  std::string trailing;
  if (header >> trailing) throw MalformedFile(path + ": trailing data in header");

  const auto vocab_size = static_cast<std::size_t>(v);
  const auto dim = static_cast<std::size_t>(d);
  std::vector<double> weights;
  weights.reserve(vocab_size * dim);

  for (std::size_t i = 0; i < vocab_size; ++i) {
    if (!std::getline(in, line)) {
      throw MalformedFile(path + ": expected " + std::to_string(vocab_size) +
                          " rows, got " + std::to_string(i));
    }
    const std::string context = path + ": row " + std::to_string(i + 1);
    std::size_t pos = 0;
    std::size_t fields = 0;
    while (pos < line.size()) {
      while (pos < line.size() && line[pos] == ' ') ++pos;
      if (pos >= line.size()) break;
      std::size_t end = line.find(' ', pos);
      if (end == std::string::npos) end = line.size();
      weights.push_back(parse_double({line.data() + pos, end - pos}, context));
      ++fields;
      pos = end;
    }
    if (fields != dim) {
      throw MalformedFile(context + ": expected " + std::to_string(dim) +
                          " values, got " + std::to_string(fields));
    }
  }
  while (std::getline(in, line)) {
    if (!line.empty()) throw MalformedFile(path + ": trailing data after last row");
  }

  EmbeddingTable table(vocab_size, dim, std::move(weights));
  table.check_finite();
  return table;
}

double cosine(const SentenceEmbedding& u, const SentenceEmbedding& v) {
  if (u.size() != v.size()) {
    throw DimensionMismatch("cosine: dimensions " + std::to_string(u.size()) + " vs " +
                            std::to_string(v.size()));
  }
  double dot_uv = 0.0, norm_u = 0.0, norm_v = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot_uv += u[i] * v[i];
    norm_u += u[i] * u[i];
    norm_v += v[i] * v[i];
  }
  const double nu = std::sqrt(norm_u);
  const double nv = std::sqrt(norm_v);
  if (nu < kNormFloor || nv < kNormFloor) return 0.0;
  return dot_uv / (nu * nv);
}

double dot(const SentenceEmbedding& u, const SentenceEmbedding& v) {
  if (u.size() != v.size()) {
    throw DimensionMismatch("dot: dimensions " + std::to_string(u.size()) + " vs " +
                            std::to_string(v.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

double similarity(SimilarityMetric metric, const SentenceEmbedding& u,
                  const SentenceEmbedding& v) {
  return metric == SimilarityMetric::kCosine ? cosine(u, v) : dot(u, v);
}

}  // namespace embedkit
