#include <benchmark/benchmark.h>

#include "embedkit/mnrl.hpp"
#include "embedkit/rng.hpp"

using namespace embedkit;

namespace {

struct Fixture {
  PairDataset pairs;
  Vocabulary vocab;
  EmbeddingTable table;
};

Fixture make_fixture(std::size_t num_words, std::size_t dim, std::size_t num_pairs) {
  Rng rng(7);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < num_words; ++i) words.push_back("w" + std::to_string(i));
  auto sentence = [&]() {
    std::string text;
    const std::size_t len = 5 + rng.next_below(8);
    for (std::size_t i = 0; i < len; ++i) {
      if (i) text += ' ';
      text += words[rng.next_below(words.size())];
    }
    return text;
  };
  PairDataset pairs;
  for (std::size_t i = 0; i < num_pairs; ++i) {
    PairRecord pair;
    pair.anchor = sentence();
    pair.positive = sentence();
    pair.label = "l" + std::to_string(i % 16);
    pairs.push_back(std::move(pair));
  }
  auto vocab = Vocabulary::build(words, 1);
  auto table = EmbeddingTable::init(vocab.size(), dim, 11);
  return {std::move(pairs), std::move(vocab), std::move(table)};
}

}  // namespace

static void BM_SimMatrix(benchmark::State& state) {
  const std::size_t batch = state.range(0);
  const auto fixture = make_fixture(500, 32, batch);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sim_matrix(fixture.table, fixture.vocab, fixture.pairs, SimilarityMetric::kCosine));
  }
}
BENCHMARK(BM_SimMatrix)->Arg(8)->Arg(32)->Arg(128);

static void BM_BackpropBatch(benchmark::State& state) {
  const std::size_t batch = state.range(0);
  const auto fixture = make_fixture(500, 32, batch);
  TrainConfig config;
  config.batch_size = batch;
  for (auto _ : state) {
    benchmark::DoNotOptimize(backprop_batch(fixture.table, fixture.vocab, fixture.pairs,
                                            config));
  }
}
BENCHMARK(BM_BackpropBatch)->Arg(8)->Arg(32);

static void BM_TrainEpoch(benchmark::State& state) {
  const auto fixture = make_fixture(500, 32, 512);
  TrainConfig config;
  config.epochs = 1;
  for (auto _ : state) {
    auto result = train(fixture.pairs, fixture.vocab, fixture.table, config);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
