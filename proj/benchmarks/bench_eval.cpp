#include <benchmark/benchmark.h>

#include "embedkit/rng.hpp"
#include "embedkit/triplet.hpp"

using namespace embedkit;

namespace {

struct Fixture {
  EmbeddingTable table;
  Vocabulary vocab;
  TripletDataset triplets;
};

Fixture make_fixture(std::size_t count) {
  Rng rng(5);
  std::vector<std::string> words;
  for (int i = 0; i < 300; ++i) words.push_back("w" + std::to_string(i));
  auto sentence = [&]() {
    std::string text;
    const std::size_t len = 4 + rng.next_below(9);
    for (std::size_t i = 0; i < len; ++i) {
      if (i) text += ' ';
      text += words[rng.next_below(words.size())];
    }
    return text;
  };
  TripletDataset triplets;
  for (std::size_t i = 0; i < count; ++i) {
    TripletRecord triplet;
    triplet.anchor = sentence();
    triplet.positive = sentence();
    triplet.negative = sentence();
    triplets.push_back(std::move(triplet));
  }
  auto vocab = Vocabulary::build(words, 1);
  auto table = EmbeddingTable::init(vocab.size(), 64, 9);
  return {std::move(table), std::move(vocab), std::move(triplets)};
}

}  // namespace

static void BM_Evaluate(benchmark::State& state) {
  const auto fixture = make_fixture(state.range(0));
  const auto embedder = make_embedder(fixture.table, fixture.vocab);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(embedder, fixture.triplets, {}));
  }
}
BENCHMARK(BM_Evaluate)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_OracleEvaluate(benchmark::State& state) {
  const auto fixture = make_fixture(state.range(0));
  const auto embedder = make_embedder(fixture.table, fixture.vocab);
  for (auto _ : state) {
    benchmark::DoNotOptimize(oracle_evaluate(embedder, fixture.triplets, {}));
  }
}
BENCHMARK(BM_OracleEvaluate)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_SimilarityProbe(benchmark::State& state) {
  const auto fixture = make_fixture(200);
  const auto embedder = make_embedder(fixture.table, fixture.vocab);
  std::vector<std::pair<std::string, std::string>> candidates;
  for (int i = 0; i < 100; ++i) {
    candidates.emplace_back("c" + std::to_string(i), fixture.triplets[i].negative);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(similarity_probe(embedder, fixture.triplets[0].anchor,
                                              candidates, SimilarityMetric::kCosine));
  }
}
BENCHMARK(BM_SimilarityProbe)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
