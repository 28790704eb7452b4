// End-to-end tests driving the embedkit binary (path via EMBEDKIT_CLI).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "embedkit/manifest.hpp"
#include "embedkit/records.hpp"
#include "embedkit/vocab.hpp"
#include "testutil.hpp"

using namespace embedkit;
using testutil::CliResult;
using testutil::run_cli;
using testutil::TempDir;

namespace {

// A small two-label pair file plus matching vocab and train config.
struct Workspace {
  TempDir dir;
  std::string pairs = dir.file("pairs.jsonl");
  std::string vocab = dir.file("vocab.txt");
  std::string config = dir.file("train.cfg");
  std::string table = dir.file("model.table");

  Workspace() {
    const auto dataset = testutil::make_cluster_corpus(4, 10, 8, 5, 10, 21);
    save_pairs(dataset, pairs);

    std::string corpus;
    for (const auto& pair : dataset) corpus += pair.anchor + "\n" + pair.positive + "\n";
    testutil::write_file(dir.file("corpus.txt"), corpus);

    testutil::write_file(config,
                         "epochs = 4\nbatch_size = 8\nlearning_rate = 0.05\n"
                         "scale = 20.0\nseed = 3\n");

    const auto vocab_result = run_cli("vocab --corpus " + dir.file("corpus.txt") +
                                          " --min-freq 1 --out " + vocab,
                                      dir);
    REQUIRE(vocab_result.exit_code == 0);
  }
};

}  // namespace

TEST_CASE("vocab command writes the expected file format and manifest") {
  TempDir dir;
  testutil::write_file(dir.file("corpus.txt"), "b b a\nc b\na\n");
  const auto result = run_cli(
      "vocab --corpus " + dir.file("corpus.txt") + " --min-freq 1 --out " + dir.file("v.txt"),
      dir);
  CHECK(result.exit_code == 0);

  const auto content = testutil::read_file(dir.file("v.txt"));
  CHECK(content == "<unk>\t0\nb\t3\na\t2\nc\t1\n");

  const auto manifest = load_manifest(dir.file("v.txt.manifest.json"));
  CHECK(manifest.command == "vocab");
  CHECK(verify_manifest_inputs(manifest));
}

TEST_CASE("vocab command error paths use the exit-code contract") {
  TempDir dir;
  const auto missing = run_cli("vocab --corpus " + dir.file("nope.txt") + " --out " +
                                   dir.file("v.txt"),
                               dir);
  CHECK(missing.exit_code == 1);
  CHECK(missing.output.find("nope.txt") != std::string::npos);

  testutil::write_file(dir.file("corpus.txt"), "a b\n");
  const auto bad_freq = run_cli("vocab --corpus " + dir.file("corpus.txt") +
                                    " --min-freq 0 --out " + dir.file("v.txt"),
                                dir);
  CHECK(bad_freq.exit_code == 2);

  const auto no_args = run_cli("vocab", dir);
  CHECK(no_args.exit_code == 2);
}

TEST_CASE("train runs are reproducible byte for byte") {
  Workspace ws;
  const std::string invocation = "train --pairs " + ws.pairs + " --vocab " + ws.vocab +
                                 " --config " + ws.config + " --dim 16 --out ";

  const auto first = run_cli(invocation + ws.dir.file("t1.table"), ws.dir);
  REQUIRE(first.exit_code == 0);
  CHECK(first.output.find("epoch 1 mean_loss") != std::string::npos);

  const auto second = run_cli(invocation + ws.dir.file("t2.table"), ws.dir);
  REQUIRE(second.exit_code == 0);

  CHECK(testutil::read_file(ws.dir.file("t1.table")) ==
        testutil::read_file(ws.dir.file("t2.table")));
  CHECK(testutil::read_file(ws.dir.file("t1.table.loss.log")) ==
        testutil::read_file(ws.dir.file("t2.table.loss.log")));

  // Loss log file matches the stdout epoch lines and decreases across epochs.
  const auto loss_log = testutil::read_file(ws.dir.file("t1.table.loss.log"));
  CHECK(first.output.find(loss_log.substr(0, loss_log.find('\n'))) != std::string::npos);
}

TEST_CASE("train on the separable corpus logs strictly decreasing epoch means") {
  TempDir dir;
  const auto pairs = testutil::make_cluster_corpus(20, 10, 20, 5, 12, 1);
  save_pairs(pairs, dir.file("pairs.jsonl"));
  std::string corpus;
  for (const auto& pair : pairs) corpus += pair.anchor + "\n" + pair.positive + "\n";
  testutil::write_file(dir.file("corpus.txt"), corpus);
  testutil::write_file(dir.file("train.cfg"), "seed = 3\n");

  REQUIRE(run_cli("vocab --corpus " + dir.file("corpus.txt") + " --min-freq 1 --out " +
                      dir.file("vocab.txt"),
                  dir)
              .exit_code == 0);
  REQUIRE(run_cli("train --pairs " + dir.file("pairs.jsonl") + " --vocab " +
                      dir.file("vocab.txt") + " --config " + dir.file("train.cfg") +
                      " --dim 16 --out " + dir.file("m.table"),
                  dir)
              .exit_code == 0);

  const auto loss_log = testutil::read_file(dir.file("m.table.loss.log"));
  std::vector<double> means;
  std::size_t pos = 0;
  while ((pos = loss_log.find("mean_loss ", pos)) != std::string::npos) {
    pos += 10;
    means.push_back(std::stod(loss_log.substr(pos)));
  }
  REQUIRE(means.size() == 4);
  for (std::size_t i = 1; i < means.size(); ++i) CHECK(means[i] < means[i - 1]);
}

TEST_CASE("train rejects an oversized batch with exit 1 and bad config with exit 2") {
  Workspace ws;
  testutil::write_file(ws.dir.file("huge.cfg"), "batch_size = 4096\n");
  const auto too_small = run_cli("train --pairs " + ws.pairs + " --vocab " + ws.vocab +
                                     " --config " + ws.dir.file("huge.cfg") + " --out " +
                                     ws.table,
                                 ws.dir);
  CHECK(too_small.exit_code == 1);
  CHECK(too_small.output.find("batch_size") != std::string::npos);

  testutil::write_file(ws.dir.file("bad.cfg"), "optimizer = adam\n");
  const auto unknown_key = run_cli("train --pairs " + ws.pairs + " --vocab " + ws.vocab +
                                       " --config " + ws.dir.file("bad.cfg") + " --out " +
                                       ws.table,
                                   ws.dir);
  CHECK(unknown_key.exit_code == 2);
}

TEST_CASE("make-triplets emits k negatives per pair and respects the seed") {
  Workspace ws;
  const auto result = run_cli("make-triplets --pairs " + ws.pairs +
                                  " --seed 5 --negatives 2 --out " + ws.dir.file("t.jsonl"),
                              ws.dir);
  REQUIRE(result.exit_code == 0);
  const auto triplets = load_triplets(ws.dir.file("t.jsonl"));
  CHECK(triplets.size() == 2 * 32);  // 4 labels x 8 pairs x 2 negatives

  const auto replayed = run_cli("make-triplets --pairs " + ws.pairs +
                                    " --seed 5 --negatives 2 --out " + ws.dir.file("t5.jsonl"),
                                ws.dir);
  REQUIRE(replayed.exit_code == 0);
  CHECK(testutil::read_file(ws.dir.file("t.jsonl")) ==
        testutil::read_file(ws.dir.file("t5.jsonl")));

  const auto reseeded = run_cli("make-triplets --pairs " + ws.pairs +
                                    " --seed 6 --negatives 2 --out " + ws.dir.file("t6.jsonl"),
                                ws.dir);
  REQUIRE(reseeded.exit_code == 0);
  const auto triplets6 = load_triplets(ws.dir.file("t6.jsonl"));
  CHECK(triplets6.size() == triplets.size());
  CHECK(testutil::read_file(ws.dir.file("t.jsonl")) !=
        testutil::read_file(ws.dir.file("t6.jsonl")));

  PairDataset single_label = {{"anchor one", "positive one", "X", ""},
                              {"anchor two", "positive two", "X", ""}};
  save_pairs(single_label, ws.dir.file("single.jsonl"));
  const auto failure = run_cli("make-triplets --pairs " + ws.dir.file("single.jsonl") +
                                   " --out " + ws.dir.file("st.jsonl"),
                               ws.dir);
  CHECK(failure.exit_code == 1);
  CHECK(failure.output.find("label") != std::string::npos);
}

TEST_CASE("eval prints the accuracy, writes the report and agrees with the oracle") {
  Workspace ws;
  REQUIRE(run_cli("train --pairs " + ws.pairs + " --vocab " + ws.vocab + " --config " +
                      ws.config + " --dim 16 --out " + ws.table,
                  ws.dir)
              .exit_code == 0);
  REQUIRE(run_cli("make-triplets --pairs " + ws.pairs + " --seed 5 --out " +
                      ws.dir.file("t.jsonl"),
                  ws.dir)
              .exit_code == 0);

  const auto result = run_cli("eval --table " + ws.table + " --vocab " + ws.vocab +
                                  " --triplets " + ws.dir.file("t.jsonl") +
                                  " --model-name m --dataset-name d --oracle --out " +
                                  ws.dir.file("report.jsonl"),
                              ws.dir);
  REQUIRE(result.exit_code == 0);
  CHECK(result.output.find("accuracy") != std::string::npos);
  CHECK(result.output.find("oracle agreement") != std::string::npos);

  const auto report = testutil::read_file(ws.dir.file("report.jsonl"));
  CHECK(report.find("\"model\":\"m\"") != std::string::npos);
  CHECK(report.find("\"dataset\":\"d\"") != std::string::npos);
  CHECK(report.find("\"metric\":\"cosine\"") != std::string::npos);

  const auto manifest = load_manifest(ws.dir.file("report.jsonl.manifest.json"));
  CHECK(verify_manifest_inputs(manifest));
}

TEST_CASE("eval reports a corrupted triplet line with its number") {
  Workspace ws;
  REQUIRE(run_cli("train --pairs " + ws.pairs + " --vocab " + ws.vocab + " --config " +
                      ws.config + " --dim 8 --out " + ws.table,
                  ws.dir)
              .exit_code == 0);
  testutil::write_file(ws.dir.file("bad.jsonl"),
                       "{\"anchor\":\"a\",\"positive\":\"b\",\"negative\":\"c\"}\n"
                       "{\"anchor\":\"a\"}\n");
  const auto result = run_cli("eval --table " + ws.table + " --vocab " + ws.vocab +
                                  " --triplets " + ws.dir.file("bad.jsonl"),
                              ws.dir);
  CHECK(result.exit_code == 1);
  CHECK(result.output.find("line 2") != std::string::npos);
}

TEST_CASE("all-pass dataset evaluates to accuracy 100.00") {
  Workspace ws;
  // Hand-built vocab and table: "aa" and "bb" embed to orthogonal rows.
  testutil::write_file(ws.dir.file("tiny.vocab"), "<unk>\t0\naa\t2\nbb\t1\n");
  testutil::write_file(ws.dir.file("tiny.table"), "3 2\n0.5 0.5\n1 0\n0 1\n");
  TripletDataset triplets(4, TripletRecord{"aa", "aa", "bb", "", ""});
  save_triplets(triplets, ws.dir.file("pass.jsonl"));

  const auto result = run_cli("eval --table " + ws.dir.file("tiny.table") + " --vocab " +
                                  ws.dir.file("tiny.vocab") + " --triplets " +
                                  ws.dir.file("pass.jsonl") + " --oracle",
                              ws.dir);
  REQUIRE(result.exit_code == 0);
  CHECK(result.output.find("100.00") != std::string::npos);
}

TEST_CASE("similarity prints four-decimal scores in rank order") {
  Workspace ws;
  testutil::write_file(ws.dir.file("tiny.vocab"), "<unk>\t0\naa\t2\nbb\t1\ncc\t1\n");
  testutil::write_file(ws.dir.file("tiny.table"),
                       "4 2\n0.5 0.5\n1 0\n0 1\n0.70710678118654757 0.70710678118654746\n");
  testutil::write_file(ws.dir.file("cands.tsv"), "far\tbb\nexact\taa\nnear\tcc\n");

  const auto result = run_cli("similarity --table " + ws.dir.file("tiny.table") + " --vocab " +
                                  ws.dir.file("tiny.vocab") + " --query aa --candidates " +
                                  ws.dir.file("cands.tsv"),
                              ws.dir);
  REQUIRE(result.exit_code == 0);
  const auto exact_pos = result.output.find("exact 1.0000");
  const auto near_pos = result.output.find("near 0.7071");
  const auto far_pos = result.output.find("far 0.0000");
  REQUIRE(exact_pos != std::string::npos);
  REQUIRE(near_pos != std::string::npos);
  REQUIRE(far_pos != std::string::npos);
  CHECK(exact_pos < near_pos);
  CHECK(near_pos < far_pos);

  testutil::write_file(ws.dir.file("empty.tsv"), "");
  const auto empty = run_cli("similarity --table " + ws.dir.file("tiny.table") + " --vocab " +
                                 ws.dir.file("tiny.vocab") + " --query aa --candidates " +
                                 ws.dir.file("empty.tsv"),
                             ws.dir);
  CHECK(empty.exit_code == 1);

  const auto no_tokens = run_cli("similarity --table " + ws.dir.file("tiny.table") +
                                     " --vocab " + ws.dir.file("tiny.vocab") +
                                     " --query ... --candidates " + ws.dir.file("cands.tsv"),
                                 ws.dir);
  CHECK(no_tokens.exit_code == 1);
}

TEST_CASE("report merges JSONL files into one markdown table") {
  TempDir dir;
  testutil::write_file(dir.file("r1.jsonl"),
                       "{\"model\":\"m\",\"dataset\":\"ds1\",\"accuracy_percent\":94.5,"
                       "\"total\":200,\"correct\":189,\"margin\":0.0,\"metric\":\"cosine\"}\n");
  testutil::write_file(dir.file("r2.jsonl"),
                       "{\"model\":\"m\",\"dataset\":\"ds2\",\"accuracy_percent\":91.6,"
                       "\"total\":250,\"correct\":229,\"margin\":0.0,\"metric\":\"cosine\"}\n");

  const auto result =
      run_cli("report " + dir.file("r1.jsonl") + " " + dir.file("r2.jsonl"), dir);
  REQUIRE(result.exit_code == 0);
  CHECK(result.output.find("| model | ds1 | ds2 |") != std::string::npos);
  CHECK(result.output.find("| m | 94.5 | 91.6 |") != std::string::npos);

  // Conflicting duplicate cell.
  testutil::write_file(dir.file("r3.jsonl"),
                       "{\"model\":\"m\",\"dataset\":\"ds1\",\"accuracy_percent\":80.0,"
                       "\"total\":200,\"correct\":160,\"margin\":0.0,\"metric\":\"cosine\"}\n");
  const auto conflict =
      run_cli("report " + dir.file("r1.jsonl") + " " + dir.file("r3.jsonl"), dir);
  CHECK(conflict.exit_code == 1);

  const auto no_files = run_cli("report", dir);
  CHECK(no_files.exit_code == 2);
}

TEST_CASE("synth generates, cleans and splits with the offline stub") {
  TempDir dir;
  testutil::write_file(dir.file("diseases.tsv"),
                       "A00\tCholera\nB20\tMalaria\nC11\tSinus infection\n");
  const auto result = run_cli("synth --diseases " + dir.file("diseases.tsv") +
                                  " --per-disease 4 --seed 9 --out " + dir.file("pairs.jsonl") +
                                  " --out-train " + dir.file("train.jsonl") + " --out-eval " +
                                  dir.file("eval.jsonl") + " --train-fraction 0.75",
                              dir);
  REQUIRE(result.exit_code == 0);

  const auto all_pairs = load_pairs(dir.file("pairs.jsonl"));
  const auto train_pairs = load_pairs(dir.file("train.jsonl"));
  const auto eval_pairs = load_pairs(dir.file("eval.jsonl"));
  CHECK(all_pairs.size() == 12);
  CHECK(train_pairs.size() == 9);
  CHECK(eval_pairs.size() == 3);

  const auto replay = run_cli("synth --diseases " + dir.file("diseases.tsv") +
                                  " --per-disease 4 --seed 9 --out " + dir.file("pairs2.jsonl"),
                              dir);
  REQUIRE(replay.exit_code == 0);
  CHECK(testutil::read_file(dir.file("pairs.jsonl")) ==
        testutil::read_file(dir.file("pairs2.jsonl")));

  const auto manifest = load_manifest(dir.file("pairs.jsonl.manifest.json"));
  CHECK(manifest.command == "synth");
  CHECK(verify_manifest_inputs(manifest));
}

TEST_CASE("unknown subcommands and bad flags exit with code 2") {
  TempDir dir;
  CHECK(run_cli("frobnicate", dir).exit_code == 2);
  CHECK(run_cli("eval --margin 0.1", dir).exit_code == 2);  // missing required options
  CHECK(run_cli("", dir).exit_code == 2);                   // subcommand required
}
