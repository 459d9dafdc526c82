// Copyright 2026 The Quantret Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// quantret: command-line driver for the quantity retrieval pipeline.

#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "quantret/config.h"
#include "quantret/corpus.h"
#include "quantret/error.h"
#include "quantret/pipeline.h"
#include "quantret/synthetic.h"
#include "quantret/tagger.h"
#include "quantret/text.h"
#include "quantret/weak_supervision.h"
#include "service/http_service.h"

namespace fs = std::filesystem;
using namespace quantret;

namespace {

struct Globals {
  std::string config_path;
  PipelineConfig config;
};

PipelineConfig ResolveConfig(const std::string &path) {
  PipelineConfig config = path.empty() ? PipelineConfig{} : LoadConfig(path);
  return ApplyEnvOverrides(config, ProcessEnv());
}

std::string ReadInput(const std::string &text, const std::string &path) {
  if (!text.empty() || path.empty()) return text;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path, path, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path, path, 0);
  out << content;
}

std::string Pick(const std::string &flag, const std::string &configured) {
  return flag.empty() ? configured : flag;
}

std::unique_ptr<Tagger> ResolveTagger(const PipelineConfig &config,
                                      const std::string &path) {
  if (!path.empty()) return LoadTagger(path);
  if (config.tagger.kind == "rule") {
    return std::make_unique<RuleBaselineTagger>(config.MakeExtractor());
  }
  throw Error(ErrorCode::kInvalidArgument,
              "no tagger checkpoint: pass --tagger or set tagger.kind to \"rule\"");
}

std::string RequireDir(const std::string &dir, const char *what) {
  if (dir.empty()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("missing ") + what);
  }
  return dir;
}

std::vector<QuantityRecord> Subset(const std::vector<QuantityRecord> &records,
                                   const std::vector<size_t> &positions) {
  std::vector<QuantityRecord> out;
  out.reserve(positions.size());
  for (size_t p : positions) out.push_back(records[p]);
  return out;
}

EngineModels LoadModels(const std::string &ranker, const std::string &embeddings) {
  EngineModels models;
  if (!ranker.empty()) models.trained = HashedEncoder::Load(ranker);
  if (!embeddings.empty()) models.imported = EmbeddingTable::Load(embeddings);
  return models;
}

// ---- extract / parse ------------------------------------------------------

struct TextArgs {
  std::string text;
  std::string input;
};

void AddTextArgs(CLI::App *cmd, TextArgs &args) {
  cmd->add_option("--text", args.text, "Input text");
  cmd->add_option("--input", args.input, "Read input text from a file")
      ->check(CLI::ExistingFile);
}

int RunExtract(const Globals &g, const TextArgs &args) {
  const QuantityExtractor extractor = g.config.MakeExtractor();
  const std::string text = ReadInput(args.text, args.input);
  int sentence = 0;
  for (const std::string &s : SplitSentences(text, g.config.terminators)) {
    std::vector<Token> tokens = MakeTokens(TokenizeWords(s));
    for (const RawQuantity &q : extractor.Extract(tokens)) {
      NormalizedValue v = extractor.Normalize(q.surface);
      std::cout << sentence << '\t' << q.begin << '\t' << q.end << '\t' << q.surface
                << '\t' << v.DecimalString() << '\t' << KindName(v.kind) << '\n';
    }
    ++sentence;
  }
  return 0;
}

int RunParse(const Globals &g, const TextArgs &args, const std::string &tagger_path) {
  const QuantityExtractor extractor = g.config.MakeExtractor();
  std::unique_ptr<Tagger> tagger =
      ResolveTagger(g.config, Pick(tagger_path, g.config.paths.tagger));
  const std::string text = ReadInput(args.text, args.input);
  int sentence = 0;
  for (const std::string &s : SplitSentences(text, g.config.terminators)) {
    std::vector<Token> tokens = MakeTokens(TokenizeWords(s));
    for (const RawQuantity &q : extractor.Extract(tokens)) {
      Description d = ParseDescription(tokens, q, *tagger);
      std::cout << sentence << '\t' << q.surface << '\t' << d.text << '\n';
    }
    ++sentence;
  }
  return 0;
}

// ---- build-corpus ---------------------------------------------------------

int RunBuildCorpus(const Globals &g, const std::string &docs_dir,
                   const std::string &tagger_path, const std::string &out_dir) {
  const std::string out = RequireDir(Pick(out_dir, g.config.paths.corpus), "--out");
  std::unique_ptr<Tagger> tagger =
      ResolveTagger(g.config, Pick(tagger_path, g.config.paths.tagger));
  std::vector<Document> docs = LoadDocuments(docs_dir);
  CorpusBuildOptions options;
  options.evidence_window = g.config.evidence_window;
  options.terminators = g.config.terminators;
  Corpus corpus = BuildCorpus(docs, g.config.MakeExtractor(), *tagger, options);
  fs::create_directories(out);
  SaveCorpus(out, corpus);
  const BuildReport &r = corpus.report;
  std::cout << "documents=" << r.documents << " sentences=" << r.sentences
            << " quantities=" << r.quantities << " records=" << r.records
            << " skipped_empty=" << r.skipped_empty
            << " failures=" << r.failures.size() << '\n';
  for (const auto &[doc, message] : r.failures) std::cerr << doc << ": " << message << '\n';
  return 0;
}

// ---- mine / train ---------------------------------------------------------

int RunMine(const Globals &g, const std::string &corpus_dir, const std::string &out) {
  Corpus corpus = LoadCorpus(RequireDir(Pick(corpus_dir, g.config.paths.corpus), "--corpus"));
  InvertedIndex index = InvertedIndex::Build(DescriptionDocuments(corpus.records),
                                             g.config.tokenizer, g.config.bm25);
  MiningResult mined = MinePairs(corpus.records, index, g.config.mining);
  const std::string path = Pick(out, g.config.paths.pairs);
  if (path.empty()) throw Error(ErrorCode::kInvalidArgument, "missing --out");
  SavePairs(path, corpus.records, mined);
  std::cout << mined.report.ToJson() << '\n';
  return 0;
}

int RunTrainRanker(const Globals &g, const std::string &corpus_dir,
                   const std::string &pairs_path, const std::string &out,
                   const std::string &export_path) {
  Corpus corpus = LoadCorpus(RequireDir(Pick(corpus_dir, g.config.paths.corpus), "--corpus"));
  const std::string model_path = Pick(out, g.config.paths.ranker);
  if (model_path.empty()) throw Error(ErrorCode::kInvalidArgument, "missing --out");

  HashedEncoder encoder;
  ContrastiveTrace trace;
  if (!pairs_path.empty()) {
    MiningResult mined = LoadPairs(pairs_path, corpus.records);
    std::vector<ContrastivePair> pairs = MakeContrastivePairs(corpus.records, mined);
    encoder = TrainContrastive(HashedEncoder::Initialize(g.config.encoder), pairs,
                               g.config.contrastive, &trace);
  } else {
    RankerTraining t = TrainRanker(corpus.records, g.config);
    std::cout << t.mined.report.ToJson() << '\n';
    encoder = std::move(t.encoder);
    trace = std::move(t.trace);
  }
  encoder.Save(model_path);
  for (size_t e = 0; e < trace.epoch_loss.size(); ++e) {
    std::printf("epoch %zu loss %.6f\n", e + 1, trace.epoch_loss[e]);
  }
  if (!export_path.empty()) {
    EmbeddingTable table(encoder.dim());
    for (const QuantityRecord &r : corpus.records) {
      table.Add(r.record_id, encoder.Encode(r.description_text));
    }
    table.Save(export_path);
  }
  return 0;
}

int RunTrainTagger(const Globals &g, const std::string &data, const std::string &out,
                   std::optional<int> epochs, uint64_t seed) {
  const std::string path = Pick(out, g.config.paths.tagger);
  if (path.empty()) throw Error(ErrorCode::kInvalidArgument, "missing --out");
  std::vector<LabeledExample> examples = LoadLabeledExamples(data);
  TaggerTrainingReport report;
  PerceptronTagger tagger = PerceptronTagger::Train(
      examples, epochs.value_or(g.config.tagger.epochs), seed, &report);
  tagger.Save(path);
  for (size_t e = 0; e < report.epoch_f1.size(); ++e) {
    std::printf("epoch %zu strict_f1 %.6f\n", e + 1, report.epoch_f1[e]);
  }
  return 0;
}

// ---- search / serve -------------------------------------------------------

struct EngineArgs {
  std::string corpus;
  std::string ranker;
  std::string embeddings;
};

void AddEngineArgs(CLI::App *cmd, EngineArgs &args) {
  cmd->add_option("--corpus", args.corpus, "Corpus directory from build-corpus");
  cmd->add_option("--ranker", args.ranker, "Trained encoder (enables cq-dense-ws)");
  cmd->add_option("--embeddings", args.embeddings,
                  "Imported record embeddings (enables cq-dense-p)");
}

std::shared_ptr<SearchEngine> MakeEngine(const Globals &g, const EngineArgs &args) {
  Corpus corpus =
      LoadCorpus(RequireDir(Pick(args.corpus, g.config.paths.corpus), "--corpus"));
  return std::make_shared<SearchEngine>(
      std::move(corpus), g.config,
      LoadModels(Pick(args.ranker, g.config.paths.ranker),
                 Pick(args.embeddings, g.config.paths.embeddings)));
}

int RunSearch(const Globals &g, const EngineArgs &args, const std::string &method,
              const std::string &query, size_t k, const std::string &format) {
  std::shared_ptr<SearchEngine> engine = MakeEngine(g, args);
  std::vector<SearchHit> hits = engine->Search(method, query, k);
  if (format == "json") {
    std::cout << service::HitsToJson(query, method, hits) << '\n';
  } else {
    std::cout << service::HitsToText(hits);
  }
  return 0;
}

volatile std::sig_atomic_t g_stop = 0;

void HandleSignal(int) { g_stop = 1; }

int RunServe(const Globals &g, const EngineArgs &args, std::optional<std::string> host,
             std::optional<int> port) {
  ServiceSettings settings = g.config.service;
  if (host) settings.host = *host;
  if (port) settings.port = *port;
  service::HttpService server(settings);
  // Listen first so /health can answer 503 while the corpus loads.
  int bound = server.Start();
  if (bound < 0) {
    throw Error(ErrorCode::kIoError, "cannot bind " + settings.host + ":" +
                                         std::to_string(settings.port));
  }
  std::cerr << "listening on " << settings.host << ':' << bound << '\n';
  server.SetEngine(MakeEngine(g, args));
  std::cerr << "ready\n";
  std::signal(SIGINT, HandleSignal);
  std::signal(SIGTERM, HandleSignal);
  while (g_stop == 0) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.Stop();
  return 0;
}

// ---- eval -----------------------------------------------------------------

void WriteReport(const EvalReport &report, const std::string &out_dir) {
  std::cout << report.ToTable();
  if (out_dir.empty()) return;
  fs::create_directories(out_dir);
  WriteFile((fs::path(out_dir) / "metrics.txt").string(), report.ToTable());
  WriteFile((fs::path(out_dir) / "report.json").string(), report.ToJson() + "\n");
  WriteFile((fs::path(out_dir) / "win_matrix.csv").string(), report.win_matrix.ToCsv());
}

int RunEval(const Globals &g, const EngineArgs &args, const std::string &labels_path,
            const std::string &out_dir) {
  const PipelineConfig &config = g.config;
  Corpus corpus =
      LoadCorpus(RequireDir(Pick(args.corpus, config.paths.corpus), "--corpus"));
  DocumentSplit split =
      SplitByDocument(corpus.records, config.eval.train_fraction, config.seed);

  EngineModels models = LoadModels(Pick(args.ranker, config.paths.ranker),
                                   Pick(args.embeddings, config.paths.embeddings));
  if (!models.trained) {
    // Weak supervision from the train split only.
    models.trained = TrainRanker(Subset(corpus.records, split.train), config).encoder;
  }
  std::vector<QuantityRecord> queries =
      SelectQueries(corpus.records, split, config.eval, config.seed);
  SearchEngine engine(std::move(corpus), config, std::move(models));

  std::vector<std::unique_ptr<RetrievalMethod>> owned;
  std::vector<const RetrievalMethod *> methods;
  for (const MethodInfo &m : MethodCatalog()) {
    if (!engine.Available(m.id)) continue;
    owned.push_back(engine.MakeRetrievalMethod(m.id));
    methods.push_back(owned.back().get());
  }
  std::optional<ManualLabels> manual;
  const std::string labels = Pick(labels_path, config.paths.labels);
  if (!labels.empty()) manual = ManualLabels::Load(labels);

  SuiteInputs inputs;
  inputs.records = engine.corpus().records;
  inputs.sentences = engine.corpus().sentences;
  inputs.manual = manual ? &*manual : nullptr;
  WriteReport(RunMethodSuite(queries, methods, inputs, config.eval.cutoff), out_dir);
  return 0;
}

// ---- synthetic ------------------------------------------------------------

void AddSyntheticArgs(CLI::App *cmd, SyntheticCorpusSpec &spec) {
  cmd->add_option("--seed", spec.seed, "Generator seed");
  cmd->add_option("--facts", spec.facts, "Number of planted facts");
  cmd->add_option("--distractor-rate", spec.distractor_rate,
                  "Target share of distractor sentences")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--min-mentions", spec.min_mentions, "Minimum mentions per fact");
  cmd->add_option("--max-mentions", spec.max_mentions, "Maximum mentions per fact");
  cmd->add_option("--min-sig", spec.min_sig_digits, "Minimum significant digits");
  cmd->add_option("--max-sig", spec.max_sig_digits, "Maximum significant digits");
}

int RunGenSynthetic(const SyntheticCorpusSpec &spec, size_t labeled,
                    const std::string &out) {
  SyntheticCorpus corpus = GenerateSyntheticCorpus(spec);
  std::vector<LabeledExample> examples;
  if (labeled > 0) examples = GenerateLabeledExamples(labeled, spec.seed + 1);
  WriteSyntheticCorpus(out, corpus, examples);
  std::printf("facts=%zu documents=%zu sentences=%zu distractor_fraction=%.4f\n",
              corpus.facts, corpus.documents.size(), corpus.sentences.size(),
              corpus.distractor_fraction);
  return 0;
}

int RunExperiment(const Globals &g, const SyntheticCorpusSpec &spec, size_t labeled,
                  const std::string &out_dir) {
  ExperimentOptions options;
  options.labeled_examples = labeled;
  options.corpus = spec;
  options.pretrain_corpus = spec;
  options.pretrain_corpus.seed = spec.seed + 1000;
  options.config = g.config;
  ExperimentResult r = RunSyntheticExperiment(options);
  std::printf("facts=%zu documents=%zu records=%zu distractor_fraction=%.4f\n", r.facts,
              r.documents, r.records, r.distractor_fraction);
  std::printf("parse strict_f1=%.4f partial_f1=%.4f\n", r.parse_strict.f1,
              r.parse_partial.f1);
  std::printf("mining %s\n", r.mining.ToJson().c_str());
  std::printf("heldout trained paraphrase=%.4f confusing=%.4f (n=%zu/%zu)\n",
              r.heldout_trained.paraphrase_mean, r.heldout_trained.confusing_mean,
              r.heldout_trained.paraphrase, r.heldout_trained.confusing);
  std::printf("heldout untrained paraphrase=%.4f confusing=%.4f\n",
              r.heldout_untrained.paraphrase_mean, r.heldout_untrained.confusing_mean);
  WriteReport(r.report, out_dir);
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Quantity retrieval over descriptions of numbers in text"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON pipeline config")
      ->check(CLI::ExistingFile);

  TextArgs extract_args;
  CLI::App *extract = app.add_subcommand("extract", "List quantities in text");
  AddTextArgs(extract, extract_args);

  TextArgs parse_args;
  std::string parse_tagger;
  CLI::App *parse = app.add_subcommand("parse", "Describe each quantity in text");
  AddTextArgs(parse, parse_args);
  parse->add_option("--tagger", parse_tagger, "Tagger checkpoint");

  std::string docs_dir, build_tagger, build_out;
  CLI::App *build = app.add_subcommand("build-corpus", "Build sentence and quantity records");
  build->add_option("--docs", docs_dir, "Directory of *.txt documents")
      ->required()
      ->check(CLI::ExistingDirectory);
  build->add_option("--tagger", build_tagger, "Tagger checkpoint");
  build->add_option("--out", build_out, "Output corpus directory");

  std::string mine_corpus, mine_out;
  CLI::App *mine = app.add_subcommand("mine", "Mine weak-supervision pairs");
  mine->add_option("--corpus", mine_corpus, "Corpus directory");
  mine->add_option("--out", mine_out, "Pairs file (JSONL)");
  mine->add_option("--k", g.config.mining.k, "Neighbours per query");

  std::string ranker_corpus, ranker_pairs, ranker_out, ranker_export;
  CLI::App *train_ranker = app.add_subcommand("train-ranker", "Train the dense encoder");
  train_ranker->add_option("--corpus", ranker_corpus, "Corpus directory");
  train_ranker->add_option("--pairs", ranker_pairs, "Pairs from `mine`; mined when absent")
      ->check(CLI::ExistingFile);
  train_ranker->add_option("--out", ranker_out, "Encoder checkpoint");
  train_ranker->add_option("--export-embeddings", ranker_export,
                           "Also write record embeddings");

  std::string tagger_data, tagger_out;
  std::optional<int> tagger_epochs;
  uint64_t tagger_seed = 0;
  CLI::App *train_tagger = app.add_subcommand("train-tagger", "Train the BIEO tagger");
  train_tagger->add_option("--data", tagger_data, "Labeled examples (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  train_tagger->add_option("--out", tagger_out, "Tagger checkpoint");
  train_tagger->add_option("--epochs", tagger_epochs, "Training epochs");
  train_tagger->add_option("--seed", tagger_seed, "Shuffle seed");

  EngineArgs search_engine;
  std::string search_method(kCqBm25), search_query, search_format = "text";
  size_t search_k = 10;
  CLI::App *search = app.add_subcommand("search", "Query the corpus");
  AddEngineArgs(search, search_engine);
  search->add_option("--method", search_method, "Retrieval method");
  search->add_option("--query", search_query, "Query text")->required();
  search->add_option("--k", search_k, "Number of hits")->check(CLI::PositiveNumber);
  search->add_option("--format", search_format, "Output format")
      ->check(CLI::IsMember({"text", "json"}));

  EngineArgs eval_engine;
  std::string eval_labels, eval_out;
  CLI::App *eval = app.add_subcommand("eval", "Compare the retrieval methods");
  AddEngineArgs(eval, eval_engine);
  eval->add_option("--labels", eval_labels, "Manual relevance labels");
  eval->add_option("--out", eval_out, "Directory for report files");
  eval->add_option("--cutoff", g.config.eval.cutoff, "Metric cutoff n");
  eval->add_option("--max-queries", g.config.eval.max_queries, "Query sample size");

  SyntheticCorpusSpec gen_spec;
  size_t gen_labeled = 1500;
  std::string gen_out;
  CLI::App *gen = app.add_subcommand("gen-synthetic", "Write a synthetic corpus");
  AddSyntheticArgs(gen, gen_spec);
  gen->add_option("--labeled", gen_labeled, "Tagger training examples to write");
  gen->add_option("--out", gen_out, "Output directory")->required();

  EngineArgs serve_engine;
  std::optional<std::string> serve_host;
  std::optional<int> serve_port;
  CLI::App *serve = app.add_subcommand("serve", "Serve the search HTTP API");
  AddEngineArgs(serve, serve_engine);
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--port", serve_port, "Port (0 picks one)");

  SyntheticCorpusSpec exp_spec;
  std::string exp_out;
  CLI::App *experiment =
      app.add_subcommand("experiment", "Generate, train and evaluate end to end");
  AddSyntheticArgs(experiment, exp_spec);
  experiment->add_option("--out", exp_out, "Directory for report files");
  size_t exp_labeled = ExperimentOptions{}.labeled_examples;
  experiment->add_option("--labeled", exp_labeled, "Tagger training examples");

  // Flags that write into g.config (e.g. --k) are applied on top of the
  // loaded config in a second pass.
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  try {
    PipelineConfig defaults;
    PipelineConfig flags = g.config;
    g.config = ResolveConfig(g.config_path);
    if (flags.mining.k != defaults.mining.k) g.config.mining.k = flags.mining.k;
    if (flags.eval.cutoff != defaults.eval.cutoff) g.config.eval.cutoff = flags.eval.cutoff;
    if (flags.eval.max_queries != defaults.eval.max_queries) {
      g.config.eval.max_queries = flags.eval.max_queries;
    }

    if (*extract) return RunExtract(g, extract_args);
    if (*parse) return RunParse(g, parse_args, parse_tagger);
    if (*build) return RunBuildCorpus(g, docs_dir, build_tagger, build_out);
    if (*mine) return RunMine(g, mine_corpus, mine_out);
    if (*train_ranker) {
      return RunTrainRanker(g, ranker_corpus, ranker_pairs, ranker_out, ranker_export);
    }
    if (*train_tagger) {
      return RunTrainTagger(g, tagger_data, tagger_out, tagger_epochs, tagger_seed);
    }
    if (*search) {
      return RunSearch(g, search_engine, search_method, search_query, search_k,
                       search_format);
    }
    if (*eval) return RunEval(g, eval_engine, eval_labels, eval_out);
    if (*gen) return RunGenSynthetic(gen_spec, gen_labeled, gen_out);
    if (*serve) return RunServe(g, serve_engine, serve_host, serve_port);
    if (*experiment) return RunExperiment(g, exp_spec, exp_labeled, exp_out);
  } catch (const Error &e) {
    std::cerr << e.Describe() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error code=internal message=\"" << e.what() << "\"\n";
    return 3;
  }
  return 1;
}
