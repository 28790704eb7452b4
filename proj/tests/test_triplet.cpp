#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "embedkit/errors.hpp"
#include "embedkit/pipeline.hpp"
#include "embedkit/report.hpp"
#include "embedkit/rng.hpp"
#include "embedkit/triplet.hpp"
#include "testutil.hpp"

using namespace embedkit;

namespace {

TripletRecord triplet_of(std::string a, std::string p, std::string n) {
  TripletRecord t;
  t.anchor = std::move(a);
  t.positive = std::move(p);
  t.negative = std::move(n);
  return t;
}

// Embedder backed by a fixed text->vector map; lets tests pin similarities
// exactly without constructing tables.
Embedder map_embedder(std::map<std::string, SentenceEmbedding> vectors) {
  return [vectors = std::move(vectors)](const std::string& text) {
    return vectors.at(text);
  };
}

}  // namespace

TEST_CASE("eval_triplet: identity positive vs orthogonal negative") {
  const auto vocab = Vocabulary::build({"a", "b"}, 1);
  const EmbeddingTable table(3, 2, {0.5, 0.5, 1.0, 0.0, 0.0, 1.0});
  const auto embedder = make_embedder(table, vocab);
  const auto outcome = eval_triplet(embedder, triplet_of("a", "a", "b"), {});
  CHECK(outcome.s_pos == doctest::Approx(1.0));
  CHECK(outcome.s_neg == 0.0);
  CHECK(outcome.passed);
}

TEST_CASE("eval_triplet: P = N ties fail under strict inequality") {
  const auto vocab = Vocabulary::build({"a", "b"}, 1);
  const auto table = EmbeddingTable::init(vocab.size(), 4, 9);
  const auto embedder = make_embedder(table, vocab);
  const auto outcome = eval_triplet(embedder, triplet_of("a b", "b a b", "b a b"), {});
  CHECK(outcome.s_pos == outcome.s_neg);
  CHECK_FALSE(outcome.passed);
}

TEST_CASE("eval_triplet applies the margin to the inequality") {
  const auto embedder = map_embedder({
      {"A", {1.0, 0.0}},
      {"P", {0.9, std::sqrt(1.0 - 0.81)}},
      {"N", {0.85, std::sqrt(1.0 - 0.7225)}},
  });
  EvalConfig margin_config;
  margin_config.margin = 0.1;
  const auto strict = eval_triplet(embedder, triplet_of("A", "P", "N"), margin_config);
  CHECK(strict.s_pos == doctest::Approx(0.9));
  CHECK(strict.s_neg == doctest::Approx(0.85));
  CHECK_FALSE(strict.passed);  // 0.9 is not > 0.85 + 0.1

  const auto loose = eval_triplet(embedder, triplet_of("A", "P", "N"), {});
  CHECK(loose.passed);
}

TEST_CASE("evaluate counts all-pass datasets as 100 percent") {
  const auto vocab = Vocabulary::build({"a", "b"}, 1);
  const EmbeddingTable table(3, 2, {0.5, 0.5, 1.0, 0.0, 0.0, 1.0});
  const auto embedder = make_embedder(table, vocab);
  TripletDataset triplets(10, triplet_of("a", "a", "b"));
  const auto report = evaluate(embedder, triplets, {});
  CHECK(report.total == 10);
  CHECK(report.correct == 10);
  CHECK(report.accuracy_percent == 100.0);
}

TEST_CASE("evaluate matches a hand-computed 4-of-8 construction") {
  // rows: a = (1,0), b = (0,1), c = (1,1).
  // cos(a,b) = 0, cos(a,c) = 1/sqrt(2): (a,a,b) and (a,c,b) pass,
  // (a,b,a) and (a,b,c) fail. Twice each: 4 of 8.
  const auto vocab = Vocabulary::build({"a", "b", "c"}, 1);
  const EmbeddingTable table(4, 2, {0.5, 0.5, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0});
  const auto embedder = make_embedder(table, vocab);
  TripletDataset triplets = {
      triplet_of("a", "a", "b"), triplet_of("a", "b", "a"),
      triplet_of("a", "c", "b"), triplet_of("a", "b", "c"),
      triplet_of("a", "a", "b"), triplet_of("a", "b", "a"),
      triplet_of("a", "c", "b"), triplet_of("a", "b", "c"),
  };
  const auto report = evaluate(embedder, triplets, {}, true);
  CHECK(report.correct == 4);
  CHECK(report.accuracy_percent == 50.0);
  REQUIRE(report.per_example.size() == 8);
  CHECK(report.per_example[2].s_pos == doctest::Approx(1.0 / std::sqrt(2.0)));

  const auto oracle = oracle_evaluate(embedder, triplets, {});
  CHECK(oracle.correct == report.correct);
}

TEST_CASE("evaluate rejects an empty dataset") {
  const auto vocab = Vocabulary::build({"a"}, 1);
  const auto table = EmbeddingTable::init(vocab.size(), 2, 0);
  const auto embedder = make_embedder(table, vocab);
  CHECK_THROWS_AS(evaluate(embedder, {}, {}), EmptyDataset);
  CHECK_THROWS_AS(oracle_evaluate(embedder, {}, {}), EmptyDataset);
}

TEST_CASE("evaluate rejects invalid margins") {
  const auto vocab = Vocabulary::build({"a"}, 1);
  const auto table = EmbeddingTable::init(vocab.size(), 2, 0);
  const auto embedder = make_embedder(table, vocab);
  TripletDataset triplets = {triplet_of("a", "a", "a")};
  EvalConfig config;
  config.margin = -0.5;
  CHECK_THROWS_AS(evaluate(embedder, triplets, config), ConfigError);
}

TEST_CASE("oracle agrees with evaluate on random and tie-heavy data") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto setup = testutil::make_random_eval_setup(500, seed % 2 ? 0.0 : 0.3, seed);
    const auto embedder = make_embedder(setup.table, setup.vocab);
    for (const double margin : {0.0, 0.05}) {
      for (const auto metric : {SimilarityMetric::kCosine, SimilarityMetric::kDot}) {
        EvalConfig config;
        config.margin = margin;
        config.metric = metric;
        const auto a = evaluate(embedder, setup.triplets, config);
        const auto b = oracle_evaluate(embedder, setup.triplets, config);
        CHECK(a.correct == b.correct);
        CHECK(a.total == b.total);
      }
    }
  }
}

TEST_CASE("accuracy is non-increasing in the margin") {
  const auto setup = testutil::make_random_eval_setup(300, 0.1, 77);
  const auto embedder = make_embedder(setup.table, setup.vocab);
  double previous = 101.0;
  for (const double margin : {0.0, 0.05, 0.1, 0.2}) {
    EvalConfig config;
    config.margin = margin;
    const auto report = evaluate(embedder, setup.triplets, config);
    CHECK(report.accuracy_percent <= previous);
    previous = report.accuracy_percent;
  }
}

TEST_CASE("scaling every table row leaves cosine decisions unchanged") {
  const auto setup = testutil::make_random_eval_setup(400, 0.15, 13);
  const auto embedder = make_embedder(setup.table, setup.vocab);
  const auto base = evaluate(embedder, setup.triplets, {}, true);

  auto scaled_table = setup.table;
  for (auto& w : scaled_table.mutable_weights()) w *= 1000.0;
  const auto scaled_embedder = make_embedder(scaled_table, setup.vocab);
  const auto scaled = evaluate(scaled_embedder, setup.triplets, {}, true);

  CHECK(base.correct == scaled.correct);
  REQUIRE(base.per_example.size() == scaled.per_example.size());
  for (std::size_t i = 0; i < base.per_example.size(); ++i) {
    CHECK(base.per_example[i].passed == scaled.per_example[i].passed);
  }
}

TEST_CASE("shuffling the dataset changes no aggregate count") {
  auto setup = testutil::make_random_eval_setup(200, 0.2, 29);
  const auto embedder = make_embedder(setup.table, setup.vocab);
  const auto before = evaluate(embedder, setup.triplets, {});
  Rng rng(1);
  shuffle(setup.triplets, rng);
  const auto after = evaluate(embedder, setup.triplets, {});
  CHECK(before.correct == after.correct);
  CHECK(before.total == after.total);
}

TEST_CASE("similarity_probe ranks an identical candidate first with score 1") {
  const auto setup = testutil::make_random_eval_setup(1, 0.0, 3);
  const auto embedder = make_embedder(setup.table, setup.vocab);
  const std::string query = "t1 t2 t3";
  const auto ranked = similarity_probe(
      embedder, query, {{"other", "t9 t12"}, {"same", query}, {"third", "t4"}},
      SimilarityMetric::kCosine);
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].first == "same");
  CHECK(ranked[0].second == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("similarity_probe breaks ties by input order") {
  // Candidates pool to rows orthogonal to the query row: both score 0.
  const auto vocab = Vocabulary::build({"a", "b", "c"}, 1);
  const EmbeddingTable table(4, 3, {0.1, 0.1, 0.1,   // <unk>
                                    1.0, 0.0, 0.0,   // a
                                    0.0, 1.0, 0.0,   // b
                                    0.0, 0.0, 1.0}); // c
  const auto embedder = make_embedder(table, vocab);
  const auto ranked = similarity_probe(embedder, "a", {{"first", "b"}, {"second", "c"}},
                                       SimilarityMetric::kCosine);
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].second == 0.0);
  CHECK(ranked[1].second == 0.0);
  CHECK(ranked[0].first == "first");
  CHECK(ranked[1].first == "second");
}

TEST_CASE("triplet JSONL round-trip preserves records and labels") {
  testutil::TempDir dir;
  TripletDataset triplets = {triplet_of("a b", "c d", "e f")};
  triplets[0].anchor_label = "X";
  triplets[0].negative_label = "Y";
  const auto path = dir.file("triplets.jsonl");
  save_triplets(triplets, path);
  const auto loaded = load_triplets(path);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].anchor == "a b");
  CHECK(loaded[0].positive == "c d");
  CHECK(loaded[0].negative == "e f");
  CHECK(loaded[0].anchor_label == "X");
  CHECK(loaded[0].negative_label == "Y");
}

TEST_CASE("triplet JSONL load reports the offending line") {
  testutil::TempDir dir;
  const auto path = dir.file("triplets.jsonl");

  testutil::write_file(path,
                       "{\"anchor\":\"a\",\"positive\":\"b\",\"negative\":\"c\"}\n"
                       "{broken\n");
  CHECK_THROWS_WITH_AS(load_triplets(path), doctest::Contains("line 2"), MalformedFile);

  testutil::write_file(path, "{\"anchor\":\"a\",\"positive\":\"b\"}\n");
  CHECK_THROWS_WITH_AS(load_triplets(path), doctest::Contains("negative"), MalformedFile);

  testutil::write_file(path, "{\"anchor\":\"a\",\"positive\":\"...\",\"negative\":\"c\"}\n");
  CHECK_THROWS_AS(load_triplets(path), MalformedFile);
}

TEST_CASE("compare_models composes evaluate across models and datasets") {
  const auto setup = testutil::make_random_eval_setup(50, 0.0, 51);
  const auto embedder = make_embedder(setup.table, setup.vocab);

  const auto rows = compare_models({{"m1", embedder}, {"m2", embedder}},
                                   {{"ds", setup.triplets}}, {});
  REQUIRE(rows.size() == 2);
  const auto direct = evaluate(embedder, setup.triplets, {});
  CHECK(rows[0].accuracy_percent == direct.accuracy_percent);
  CHECK(rows[0].correct == rows[1].correct);  // identical models, identical rows
  CHECK(rows[0].model == "m1");
  CHECK(rows[1].model == "m2");
}

TEST_CASE("report JSONL round-trip and markdown merge") {
  testutil::TempDir dir;
  std::vector<ReportRow> rows;
  ReportRow r1;
  r1.model = "m";
  r1.dataset = "ds1";
  r1.accuracy_percent = 94.5;
  r1.total = 200;
  r1.correct = 189;
  rows.push_back(r1);
  ReportRow r2 = r1;
  r2.dataset = "ds2";
  r2.accuracy_percent = 91.6;
  r2.correct = 183;  // not exactly 91.6 of 200; value is what the file says
  rows.push_back(r2);

  const auto path = dir.file("report.jsonl");
  write_report_jsonl(rows, path);
  const auto loaded = load_report_jsonl(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].model == "m");
  CHECK(loaded[0].accuracy_percent == 94.5);
  CHECK(loaded[1].dataset == "ds2");

  const auto markdown = merge_reports_markdown(loaded);
  CHECK(markdown == "| model | ds1 | ds2 |\n"
                    "| --- | --- | --- |\n"
                    "| m | 94.5 | 91.6 |\n");
}

TEST_CASE("merge rejects conflicting duplicate cells, accepts agreeing ones") {
  ReportRow row;
  row.model = "m";
  row.dataset = "ds";
  row.accuracy_percent = 50.0;
  row.total = 10;
  row.correct = 5;

  ReportRow same = row;
  CHECK(merge_reports_markdown(std::vector<ReportRow>{row, same}) ==
        "| model | ds |\n| --- | --- |\n| m | 50.0 |\n");

  ReportRow conflicting = row;
  conflicting.correct = 6;
  conflicting.accuracy_percent = 60.0;
  CHECK_THROWS_AS(merge_reports_markdown(std::vector<ReportRow>{row, conflicting}),
                  MalformedFile);
}

TEST_CASE("text report contains the two-decimal accuracy") {
  ReportRow row;
  row.model = "model-a";
  row.dataset = "ds";
  row.accuracy_percent = 100.0;
  row.total = 10;
  row.correct = 10;
  const auto text = render_text_report(std::vector<ReportRow>{row});
  CHECK(text.find("accuracy") != std::string::npos);
  CHECK(text.find("100.00") != std::string::npos);
  CHECK(text.find("10/10") != std::string::npos);
}
