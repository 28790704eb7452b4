#include <benchmark/benchmark.h>

#include "embedkit/embedding.hpp"
#include "embedkit/rng.hpp"
#include "embedkit/vocab.hpp"

using namespace embedkit;

namespace {

std::vector<TokenId> random_ids(std::size_t count, std::size_t vocab_size, Rng& rng) {
  std::vector<TokenId> ids(count);
  for (auto& id : ids) id = static_cast<TokenId>(rng.next_below(vocab_size));
  return ids;
}

}  // namespace

static void BM_MeanPool(benchmark::State& state) {
  const std::size_t dim = state.range(0);
  const auto table = EmbeddingTable::init(5000, dim, 1);
  Rng rng(2);
  const auto ids = random_ids(12, table.vocab_size(), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(table.mean_pool(ids));
  }
}
BENCHMARK(BM_MeanPool)->Arg(16)->Arg(64)->Arg(256);

static void BM_Cosine(benchmark::State& state) {
  const std::size_t dim = state.range(0);
  Rng rng(3);
  SentenceEmbedding u(dim), v(dim);
  for (auto& x : u) x = rng.next_double(-1.0, 1.0);
  for (auto& x : v) x = rng.next_double(-1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cosine(u, v));
  }
}
BENCHMARK(BM_Cosine)->Arg(16)->Arg(64)->Arg(256);

static void BM_EmbedText(benchmark::State& state) {
  std::vector<std::string> corpus;
  for (int i = 0; i < 2000; ++i) corpus.push_back("word" + std::to_string(i));
  const auto vocab = Vocabulary::build(corpus, 1);
  const auto table = EmbeddingTable::init(vocab.size(), 64, 1);
  const std::string text = "word1 word20 word300 word400 word5 word60 word700 word8";
  for (auto _ : state) {
    benchmark::DoNotOptimize(table.embed(vocab, text));
  }
}
BENCHMARK(BM_EmbedText);

BENCHMARK_MAIN();
