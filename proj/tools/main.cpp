// embedkit command-line tool: vocabulary building, pair-embedding training,
// triplet construction, triplet evaluation, similarity probes, report
// merging, and synthetic dataset generation.
//
// Exit codes: 0 success, 1 data/runtime error, 2 usage/config error,
// 3 evaluator/oracle disagreement.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "embedkit/embedding.hpp"
#include "embedkit/errors.hpp"
#include "embedkit/manifest.hpp"
#include "embedkit/mnrl.hpp"
#include "embedkit/pipeline.hpp"
#include "embedkit/records.hpp"
#include "embedkit/report.hpp"
#include "embedkit/triplet.hpp"
#include "embedkit/vocab.hpp"

namespace {

using namespace embedkit;

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

RunManifest begin_manifest(const std::string& command, std::optional<std::uint64_t> seed) {
  RunManifest manifest;
  manifest.command = command;
  manifest.seed = seed;
  manifest.started_at = now_iso8601_utc();
  return manifest;
}

void finish_manifest(RunManifest& manifest, const std::string& path) {
  manifest.finished_at = now_iso8601_utc();
  save_manifest(manifest, path);
}

struct VocabArgs {
  std::string corpus_path;
  std::uint64_t min_freq = 1;
  std::string out_path;
  std::string manifest_path;
};

int run_vocab(const VocabArgs& args) {
  auto manifest = begin_manifest("vocab", std::nullopt);
  manifest.add_input(args.corpus_path);
  manifest.config.emplace_back("min_freq", std::to_string(args.min_freq));

  const auto corpus = read_lines(args.corpus_path);
  const auto vocab = Vocabulary::build(corpus, args.min_freq);
  vocab.save(args.out_path);
  manifest.outputs.push_back(args.out_path);
  finish_manifest(manifest, args.manifest_path);

  std::cout << "vocab size " << vocab.size() << " written to " << args.out_path << "\n";
  return 0;
}

struct TrainArgs {
  std::string pairs_path;
  std::string vocab_path;
  std::string config_path;
  std::string out_path;
  std::size_t dim = 32;
  std::string loss_log_path;
  std::string manifest_path;
};

int run_train(const TrainArgs& args) {
  const auto pairs = load_pairs(args.pairs_path);
  const auto vocab = Vocabulary::load(args.vocab_path);
  const auto config = TrainConfig::from_file(args.config_path);

  auto manifest = begin_manifest("train", config.seed);
  manifest.add_input(args.pairs_path);
  manifest.add_input(args.vocab_path);
  manifest.add_input(args.config_path);
  manifest.config = {{"epochs", std::to_string(config.epochs)},
                     {"batch_size", std::to_string(config.batch_size)},
                     {"learning_rate", std::to_string(config.learning_rate)},
                     {"scale", std::to_string(config.scale)},
                     {"seed", std::to_string(config.seed)},
                     {"similarity", metric_name(config.similarity)},
                     {"shuffle_each_epoch", config.shuffle_each_epoch ? "true" : "false"},
                     {"dim", std::to_string(args.dim)}};

  auto initial = EmbeddingTable::init(vocab.size(), args.dim, config.seed);
  auto [table, stats] = train(pairs, vocab, std::move(initial), config);
  table.save(args.out_path);

  const std::string loss_log = format_loss_log(stats);
  write_text(args.loss_log_path, loss_log);
  std::cout << loss_log;

  manifest.outputs.push_back(args.out_path);
  manifest.outputs.push_back(args.loss_log_path);
  finish_manifest(manifest, args.manifest_path);

  std::cout << "table " << table.vocab_size() << "x" << table.dim() << " written to "
            << args.out_path << "\n";
  return 0;
}

struct MakeTripletsArgs {
  std::string pairs_path;
  std::uint64_t seed = 0;
  std::size_t negatives = 1;
  std::string out_path;
  std::string manifest_path;
};

int run_make_triplets(const MakeTripletsArgs& args) {
  auto manifest = begin_manifest("make-triplets", args.seed);
  manifest.add_input(args.pairs_path);
  manifest.config.emplace_back("negatives_per_pair", std::to_string(args.negatives));

  const auto pairs = load_pairs(args.pairs_path);
  const auto triplets = make_triplets(pairs, args.seed, args.negatives);
  save_triplets(triplets, args.out_path);

  manifest.outputs.push_back(args.out_path);
  finish_manifest(manifest, args.manifest_path);

  std::cout << triplets.size() << " triplets written to " << args.out_path << "\n";
  return 0;
}

struct EvalArgs {
  std::string table_path;
  std::string vocab_path;
  std::string triplets_path;
  double margin = 0.0;
  std::string metric = "cosine";
  bool oracle = false;
  bool per_example = false;
  std::string out_path;
  std::string model_name;
  std::string dataset_name;
  std::string manifest_path;
};

int run_eval(const EvalArgs& args) {
  auto manifest = begin_manifest("eval", std::nullopt);
  manifest.add_input(args.table_path);
  manifest.add_input(args.vocab_path);
  manifest.add_input(args.triplets_path);

  EvalConfig config;
  config.margin = args.margin;
  config.metric = parse_metric(args.metric);
  config.validate();
  manifest.config = {{"margin", std::to_string(config.margin)},
                     {"metric", metric_name(config.metric)},
                     {"oracle", args.oracle ? "true" : "false"}};

  const auto table = EmbeddingTable::load(args.table_path);
  const auto vocab = Vocabulary::load(args.vocab_path);
  const auto triplets = load_triplets(args.triplets_path);
  const auto embedder = make_embedder(table, vocab);

  const std::string model = args.model_name.empty() ? stem_of(args.table_path) : args.model_name;
  const std::string dataset =
      args.dataset_name.empty() ? stem_of(args.triplets_path) : args.dataset_name;

  const auto report = evaluate(embedder, triplets, config, args.per_example);
  const auto row = make_report_row(model, dataset, report);
  std::cout << render_text_report({&row, 1});

  if (args.per_example) {
    for (std::size_t i = 0; i < report.per_example.size(); ++i) {
      const auto& outcome = report.per_example[i];
      std::printf("triplet %zu s_pos %.6f s_neg %.6f %s\n", i + 1, outcome.s_pos,
                  outcome.s_neg, outcome.passed ? "pass" : "fail");
    }
  }

  write_report_jsonl({&row, 1}, args.out_path);
  manifest.outputs.push_back(args.out_path);
  finish_manifest(manifest, args.manifest_path);

  if (args.oracle) {
    const auto oracle_report = oracle_evaluate(embedder, triplets, config);
    if (oracle_report.correct != report.correct || oracle_report.total != report.total) {
      std::cerr << "oracle disagreement: evaluate " << report.correct << "/" << report.total
                << " vs oracle " << oracle_report.correct << "/" << oracle_report.total
                << "\n";
      return 3;
    }
    std::cout << "oracle agreement: " << report.correct << "/" << report.total << "\n";
  }
  return 0;
}

struct SimilarityArgs {
  std::string table_path;
  std::string vocab_path;
  std::string query;
  std::string candidates_path;
  std::string metric = "cosine";
  std::string manifest_path;
};

int run_similarity(const SimilarityArgs& args) {
  auto manifest = begin_manifest("similarity", std::nullopt);
  manifest.add_input(args.table_path);
  manifest.add_input(args.vocab_path);
  manifest.add_input(args.candidates_path);
  manifest.config = {{"metric", args.metric}, {"query", args.query}};

  const auto table = EmbeddingTable::load(args.table_path);
  const auto vocab = Vocabulary::load(args.vocab_path);

  std::vector<std::pair<std::string, std::string>> candidates;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(args.candidates_path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw MalformedLine(args.candidates_path + ": line " + std::to_string(line_no) +
                          ": expected 'name\\ttext'");
    }
    candidates.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  if (candidates.empty()) {
    throw EmptyInput(args.candidates_path + ": no candidates");
  }

  const auto embedder = make_embedder(table, vocab);
  const auto ranked =
      similarity_probe(embedder, args.query, candidates, parse_metric(args.metric));
  for (const auto& [name, score] : ranked) {
    std::printf("%s %.4f\n", name.c_str(), score);
  }
  finish_manifest(manifest, args.manifest_path);
  return 0;
}

struct ReportArgs {
  std::vector<std::string> report_paths;
  std::string out_path;
  std::string manifest_path;
};

int run_report(const ReportArgs& args) {
  auto manifest = begin_manifest("report", std::nullopt);
  std::vector<ReportRow> rows;
  for (const auto& path : args.report_paths) {
    manifest.add_input(path);
    for (auto& row : load_report_jsonl(path)) rows.push_back(std::move(row));
  }
  const std::string table = merge_reports_markdown(rows);
  std::cout << table;
  if (!args.out_path.empty()) {
    write_text(args.out_path, table);
    manifest.outputs.push_back(args.out_path);
  }
  finish_manifest(manifest, args.manifest_path);
  return 0;
}

struct SynthArgs {
  std::string diseases_path;
  std::string provider_config_path;
  std::string template_id = "description";
  std::size_t per_disease = 2;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string out_train_path;
  std::string out_eval_path;
  double train_fraction = 0.8;
  std::string manifest_path;
};

int run_synth(const SynthArgs& args) {
  auto manifest = begin_manifest("synth", args.seed);
  manifest.add_input(args.diseases_path);
  manifest.config = {{"template_id", args.template_id},
                     {"per_disease", std::to_string(args.per_disease)},
                     {"train_fraction", std::to_string(args.train_fraction)}};

  const auto diseases = load_diseases(args.diseases_path);

  std::unique_ptr<Provider> http_provider;
  StubProvider stub_provider(args.seed);
  Provider* provider = &stub_provider;
  if (!args.provider_config_path.empty()) {
    manifest.add_input(args.provider_config_path);
    http_provider = make_http_provider(load_provider_config(args.provider_config_path));
    provider = http_provider.get();
  }
  manifest.config.emplace_back("provider", provider->name());

  auto generated = generate_pairs(diseases, *provider, args.template_id, args.per_disease,
                                  args.seed);
  for (const auto& warning : generated.warnings) std::cerr << "warning: " << warning << "\n";

  const auto cleaned = clean(generated.pairs, diseases);
  std::cout << "generated " << generated.pairs.size() << " pairs (" << generated.skipped
            << " skipped), kept " << cleaned.stats.kept << " after cleaning (duplicate "
            << cleaned.stats.dropped_duplicate << ", name-leak "
            << cleaned.stats.dropped_name_leak << ", empty " << cleaned.stats.dropped_empty
            << ")\n";

  save_pairs(cleaned.pairs, args.out_path);
  manifest.outputs.push_back(args.out_path);

  if (!args.out_train_path.empty() || !args.out_eval_path.empty()) {
    if (args.out_train_path.empty() || args.out_eval_path.empty()) {
      throw ConfigError("--out-train and --out-eval must be given together");
    }
    const auto [train_set, eval_set] =
        shuffle_split(cleaned.pairs, args.seed, args.train_fraction, 1.0 - args.train_fraction);
    save_pairs(train_set, args.out_train_path);
    save_pairs(eval_set, args.out_eval_path);
    manifest.outputs.push_back(args.out_train_path);
    manifest.outputs.push_back(args.out_eval_path);
    std::cout << "split " << train_set.size() << " train / " << eval_set.size() << " eval\n";
  }
  finish_manifest(manifest, args.manifest_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"embedkit: train and evaluate mean-pooled token-embedding sentence encoders"};
  app.require_subcommand(1);

  VocabArgs vocab_args;
  auto* cmd_vocab = app.add_subcommand("vocab", "Build a vocabulary from a line-per-document corpus");
  cmd_vocab->add_option("--corpus", vocab_args.corpus_path, "Corpus file, one document per line")
      ->required();
  cmd_vocab->add_option("--min-freq", vocab_args.min_freq, "Minimum token frequency")
      ->check(CLI::PositiveNumber);
  cmd_vocab->add_option("--out", vocab_args.out_path, "Output vocabulary file")->required();
  cmd_vocab->add_option("--manifest", vocab_args.manifest_path, "Manifest path");

  TrainArgs train_args;
  auto* cmd_train = app.add_subcommand("train", "Train an embedding table on anchor/positive pairs");
  cmd_train->add_option("--pairs", train_args.pairs_path, "Pair JSONL file")->required();
  cmd_train->add_option("--vocab", train_args.vocab_path, "Vocabulary file")->required();
  cmd_train->add_option("--config", train_args.config_path, "Training config (key = value)")
      ->required();
  cmd_train->add_option("--out", train_args.out_path, "Output table file")->required();
  cmd_train->add_option("--dim", train_args.dim, "Embedding dimension")
      ->check(CLI::PositiveNumber);
  cmd_train->add_option("--loss-log", train_args.loss_log_path, "Loss log path");
  cmd_train->add_option("--manifest", train_args.manifest_path, "Manifest path");

  MakeTripletsArgs triplet_args;
  auto* cmd_triplets =
      app.add_subcommand("make-triplets", "Construct triplets by cross-label negative sampling");
  cmd_triplets->add_option("--pairs", triplet_args.pairs_path, "Pair JSONL file")->required();
  cmd_triplets->add_option("--seed", triplet_args.seed, "Sampling seed");
  cmd_triplets->add_option("--negatives", triplet_args.negatives, "Negatives per pair")
      ->check(CLI::PositiveNumber);
  cmd_triplets->add_option("--out", triplet_args.out_path, "Output triplet JSONL")->required();
  cmd_triplets->add_option("--manifest", triplet_args.manifest_path, "Manifest path");

  EvalArgs eval_args;
  auto* cmd_eval = app.add_subcommand("eval", "Evaluate triplet accuracy of a trained table");
  cmd_eval->add_option("--table", eval_args.table_path, "Embedding table file")->required();
  cmd_eval->add_option("--vocab", eval_args.vocab_path, "Vocabulary file")->required();
  cmd_eval->add_option("--triplets", eval_args.triplets_path, "Triplet JSONL file")->required();
  cmd_eval->add_option("--margin", eval_args.margin, "Pass margin");
  cmd_eval->add_option("--metric", eval_args.metric, "cosine or dot");
  cmd_eval->add_flag("--oracle", eval_args.oracle,
                     "Cross-check with the independent oracle evaluator");
  cmd_eval->add_flag("--per-example", eval_args.per_example, "Print per-triplet similarities");
  cmd_eval->add_option("--out", eval_args.out_path, "Report JSONL path");
  cmd_eval->add_option("--model-name", eval_args.model_name, "Model name in the report");
  cmd_eval->add_option("--dataset-name", eval_args.dataset_name, "Dataset name in the report");
  cmd_eval->add_option("--manifest", eval_args.manifest_path, "Manifest path");

  SimilarityArgs sim_args;
  auto* cmd_sim = app.add_subcommand("similarity", "Rank candidates by similarity to a query");
  cmd_sim->add_option("--table", sim_args.table_path, "Embedding table file")->required();
  cmd_sim->add_option("--vocab", sim_args.vocab_path, "Vocabulary file")->required();
  cmd_sim->add_option("--query", sim_args.query, "Query text")->required();
  cmd_sim->add_option("--candidates", sim_args.candidates_path, "TSV file of name\\ttext")
      ->required();
  cmd_sim->add_option("--metric", sim_args.metric, "cosine or dot");
  cmd_sim->add_option("--manifest", sim_args.manifest_path, "Manifest path");

  ReportArgs report_args;
  auto* cmd_report = app.add_subcommand("report", "Merge report JSONL files into a markdown table");
  cmd_report->add_option("reports", report_args.report_paths, "Report JSONL files")
      ->required()
      ->expected(-1);
  cmd_report->add_option("--out", report_args.out_path, "Write the table here too");
  cmd_report->add_option("--manifest", report_args.manifest_path, "Manifest path");

  SynthArgs synth_args;
  auto* cmd_synth =
      app.add_subcommand("synth", "Generate, clean and split a synthetic pair dataset");
  cmd_synth->add_option("--diseases", synth_args.diseases_path, "TSV of code\\tname")->required();
  cmd_synth->add_option("--provider-config", synth_args.provider_config_path,
                        "HTTP provider config; omit to use the offline stub");
  cmd_synth->add_option("--template", synth_args.template_id, "Template id (description|qa)");
  cmd_synth->add_option("--per-disease", synth_args.per_disease, "Pairs per disease")
      ->check(CLI::PositiveNumber);
  cmd_synth->add_option("--seed", synth_args.seed, "Generation/shuffle seed");
  cmd_synth->add_option("--out", synth_args.out_path, "Cleaned pair JSONL")->required();
  cmd_synth->add_option("--out-train", synth_args.out_train_path, "Train split JSONL");
  cmd_synth->add_option("--out-eval", synth_args.out_eval_path, "Eval split JSONL");
  cmd_synth->add_option("--train-fraction", synth_args.train_fraction, "Train fraction")
      ->check(CLI::Range(0.0, 1.0));
  cmd_synth->add_option("--manifest", synth_args.manifest_path, "Manifest path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*cmd_vocab) {
      if (vocab_args.manifest_path.empty()) {
        vocab_args.manifest_path = vocab_args.out_path + ".manifest.json";
      }
      return run_vocab(vocab_args);
    }
    if (*cmd_train) {
      if (train_args.loss_log_path.empty()) {
        train_args.loss_log_path = train_args.out_path + ".loss.log";
      }
      if (train_args.manifest_path.empty()) {
        train_args.manifest_path = train_args.out_path + ".manifest.json";
      }
      return run_train(train_args);
    }
    if (*cmd_triplets) {
      if (triplet_args.manifest_path.empty()) {
        triplet_args.manifest_path = triplet_args.out_path + ".manifest.json";
      }
      return run_make_triplets(triplet_args);
    }
    if (*cmd_eval) {
      if (eval_args.out_path.empty()) {
        eval_args.out_path = eval_args.triplets_path + ".report.jsonl";
      }
      if (eval_args.manifest_path.empty()) {
        eval_args.manifest_path = eval_args.out_path + ".manifest.json";
      }
      return run_eval(eval_args);
    }
    if (*cmd_sim) {
      if (sim_args.manifest_path.empty()) {
        sim_args.manifest_path = "embedkit-similarity.manifest.json";
      }
      return run_similarity(sim_args);
    }
    if (*cmd_report) {
      if (report_args.manifest_path.empty()) {
        report_args.manifest_path = report_args.out_path.empty()
                                        ? "embedkit-report.manifest.json"
                                        : report_args.out_path + ".manifest.json";
      }
      return run_report(report_args);
    }
    if (*cmd_synth) {
      if (synth_args.manifest_path.empty()) {
        synth_args.manifest_path = synth_args.out_path + ".manifest.json";
      }
      return run_synth(synth_args);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
