#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "embedkit/embedding.hpp"
#include "embedkit/records.hpp"
#include "embedkit/vocab.hpp"

namespace embedkit::testutil {

// Synthetic separable corpus: num_labels "diseases" with pairwise-disjoint
// token sets ("d03t7" style), pairs_per_label anchor/positive sentences per
// label, each sentence min_len..max_len tokens drawn only from that label's
// set.
PairDataset make_cluster_corpus(std::size_t num_labels, std::size_t tokens_per_label,
                                std::size_t pairs_per_label, std::size_t min_len,
                                std::size_t max_len, std::uint64_t seed);

// Vocabulary over every anchor and positive in the dataset, min_freq 1.
Vocabulary vocab_from_pairs(const PairDataset& pairs);

// Random triplets over a 30-word vocabulary plus a random table;
// tie_fraction of the triplets use P = N.
struct RandomEvalSetup {
  EmbeddingTable table;
  Vocabulary vocab;
  TripletDataset triplets;
};

RandomEvalSetup make_random_eval_setup(std::size_t count, double tie_fraction,
                                       std::uint64_t seed);

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

// Runs the embedkit binary (path from the EMBEDKIT_CLI environment variable)
// with the given argument string, capturing combined output.
CliResult run_cli(const std::string& args, const TempDir& dir);

std::string cli_path();

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace embedkit::testutil
