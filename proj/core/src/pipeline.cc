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

#include "quantret/pipeline.h"

#include <algorithm>
#include <random>

#include "quantret/error.h"

namespace quantret {

const std::vector<MethodInfo> &MethodCatalog() {
  static const std::vector<MethodInfo> kMethods = {
      {std::string(kCsBm25), "BM25 over whole sentences"},
      {std::string(kCqBm25), "BM25 over parsed quantity descriptions"},
      {std::string(kCqDense), "cosine ranking with the untrained hashed encoder"},
      {std::string(kCqDensePretrained), "cosine ranking with imported embeddings"},
      {std::string(kCqDenseWeak), "cosine ranking with the weakly supervised encoder"},
  };
  return kMethods;
}

bool IsKnownMethod(std::string_view id) {
  for (const MethodInfo &m : MethodCatalog()) {
    if (m.id == id) return true;
  }
  return false;
}

class EngineRetrieval : public RetrievalMethod {
 public:
  EngineRetrieval(const SearchEngine &engine, std::string method)
      : engine_(engine), method_(std::move(method)) {}

  std::string id() const override { return method_; }

  Granularity granularity() const override {
    return method_ == kCsBm25 ? Granularity::kSentence : Granularity::kRecord;
  }

  std::vector<std::string> Retrieve(const QuantityRecord &query,
                                    size_t k) const override {
    const std::string own = query.sentence_key();
    const bool sentences = granularity() == Granularity::kSentence;
    size_t extra = 1;
    if (!sentences) {
      auto it = engine_.sentence_records_.find(own);
      extra = it == engine_.sentence_records_.end() ? 0 : it->second;
    }
    std::vector<std::string> ids;
    for (const SearchEngine::RefHit &hit :
         engine_.Rank(method_, query.description_text, &query, k + extra)) {
      if (ids.size() == k) break;
      if (sentences) {
        const SentenceRecord &s = engine_.corpus_.sentences[hit.ref];
        if (s.id() == own) continue;
        ids.push_back(s.id());
      } else {
        const QuantityRecord &r = engine_.corpus_.records[hit.ref];
        if (r.sentence_key() == own) continue;
        ids.push_back(r.record_id);
      }
    }
    return ids;
  }

 private:
  const SearchEngine &engine_;
  std::string method_;
};

SearchEngine::SearchEngine(Corpus corpus, const PipelineConfig &config,
                           EngineModels models)
    : corpus_(std::move(corpus)),
      config_(config),
      untrained_(HashedEncoder::Initialize(config.encoder)),
      models_(std::move(models)) {
  description_index_ = InvertedIndex::Build(DescriptionDocuments(corpus_.records),
                                            config_.tokenizer, config_.bm25);
  sentence_index_ = InvertedIndex::Build(SentenceDocuments(corpus_.sentences),
                                         config_.tokenizer, config_.bm25);
  std::vector<std::string> ids;
  std::vector<std::string> texts;
  for (size_t r = 0; r < corpus_.records.size(); ++r) {
    const QuantityRecord &rec = corpus_.records[r];
    ids.push_back(rec.record_id);
    texts.push_back(rec.description_text);
    record_lookup_.emplace(rec.record_id, r);
    ++sentence_records_[rec.sentence_key()];
  }
  untrained_index_ = DenseIndex::Build(ids, texts, untrained_);
  if (models_.trained) {
    trained_index_ = DenseIndex::Build(ids, texts, *models_.trained);
  }
  if (models_.imported) {
    const size_t dim = models_.imported->dim();
    std::vector<EmbeddingVector> vectors;
    for (const QuantityRecord &rec : corpus_.records) {
      const EmbeddingVector *v = models_.imported->Find(rec.record_id);
      vectors.push_back(v != nullptr ? *v : EmbeddingVector(dim, 0.0));
    }
    imported_index_ = DenseIndex::Build(ids, std::move(vectors));
  }
}

bool SearchEngine::Available(std::string_view method) const {
  if (method == kCsBm25 || method == kCqBm25 || method == kCqDense) return true;
  if (method == kCqDenseWeak) return models_.trained.has_value();
  if (method == kCqDensePretrained) return models_.imported.has_value();
  return false;
}

std::vector<std::string> SearchEngine::AvailableMethods() const {
  std::vector<std::string> out;
  for (const MethodInfo &m : MethodCatalog()) {
    if (Available(m.id)) out.push_back(m.id);
  }
  return out;
}

const EmbeddingVector *SearchEngine::ImportedVector(std::string_view record_id) const {
  return models_.imported ? models_.imported->Find(record_id) : nullptr;
}

std::vector<SearchEngine::RefHit> SearchEngine::Rank(
    std::string_view method, std::string_view text,
    const QuantityRecord *query_record, size_t k) const {
  if (!IsKnownMethod(method)) {
    throw Error(ErrorCode::kUnknownMethod, "unknown method " + std::string(method));
  }
  if (!Available(method)) {
    throw Error(ErrorCode::kUnknownMethod,
                "method " + std::string(method) + " has no model loaded");
  }
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  std::vector<RefHit> out;
  if (method == kCsBm25 || method == kCqBm25) {
    const InvertedIndex &index =
        method == kCsBm25 ? sentence_index_ : description_index_;
    for (const ScoredHit &h : index.Search(text, k)) out.push_back({h.ref, h.score});
    return out;
  }
  std::vector<DenseHit> hits;
  if (method == kCqDensePretrained) {
    if (query_record == nullptr) {
      throw Error(ErrorCode::kUnsupported,
                  "imported embeddings only answer queries that are corpus records");
    }
    const EmbeddingVector *v = ImportedVector(query_record->record_id);
    if (v == nullptr) {
      throw Error(ErrorCode::kNotFound,
                  "no imported embedding for " + query_record->record_id);
    }
    hits = imported_index_.Search(*v, k);
  } else if (method == kCqDenseWeak) {
    hits = trained_index_.Search(models_.trained->Encode(text), k);
  } else {
    hits = untrained_index_.Search(untrained_.Encode(text), k);
  }
  for (const DenseHit &h : hits) out.push_back({h.ref, h.score});
  return out;
}

std::vector<SearchHit> SearchEngine::Search(std::string_view method,
                                            std::string_view query,
                                            size_t k) const {
  std::vector<SearchHit> hits;
  for (const RefHit &h : Rank(method, query, nullptr, k)) {
    SearchHit hit;
    if (method == kCsBm25) {
      const SentenceRecord &s = corpus_.sentences[h.ref];
      std::string values;
      for (const RawQuantity &q : s.quantities) {
        if (!values.empty()) values += "; ";
        values += q.surface;
      }
      hit.value = std::move(values);
      hit.evidence = s.text();
      hit.doc_id = s.doc_id;
      hit.sentence_id = s.sentence_id;
      hit.record_id = s.id();
    } else {
      hit = RecordHit(corpus_.records[h.ref]);
    }
    hit.rank = hits.size() + 1;
    hit.score = h.score;
    hits.push_back(std::move(hit));
  }
  return hits;
}

const QuantityRecord *SearchEngine::FindRecord(std::string_view record_id) const {
  auto it = record_lookup_.find(std::string(record_id));
  return it == record_lookup_.end() ? nullptr : &corpus_.records[it->second];
}

SearchHit SearchEngine::RecordHit(const QuantityRecord &record) const {
  SearchHit hit;
  hit.value = record.surface;
  hit.description = record.description_text;
  hit.evidence = record.evidence;
  hit.doc_id = record.doc_id;
  hit.sentence_id = record.sentence_id;
  hit.record_id = record.record_id;
  return hit;
}

std::unique_ptr<RetrievalMethod> SearchEngine::MakeRetrievalMethod(
    std::string_view method) const {
  if (!IsKnownMethod(method)) {
    throw Error(ErrorCode::kUnknownMethod, "unknown method " + std::string(method));
  }
  return std::make_unique<EngineRetrieval>(*this, std::string(method));
}

std::vector<ContrastivePair> MakeContrastivePairs(
    std::span<const QuantityRecord> records, const MiningResult &mined) {
  std::vector<ContrastivePair> pairs;
  for (const auto *list : {&mined.paraphrase, &mined.confusing}) {
    for (const MinedPair &p : *list) {
      pairs.push_back({records[p.i].description_text, records[p.j].description_text,
                       p.paraphrase, p.anchor});
    }
  }
  return pairs;
}

RankerTraining TrainRanker(std::span<const QuantityRecord> records,
                           const PipelineConfig &config) {
  RankerTraining out;
  InvertedIndex index =
      InvertedIndex::Build(DescriptionDocuments(records), config.tokenizer, config.bm25);
  out.mined = MinePairs(records, index, config.mining);
  std::vector<ContrastivePair> pairs = MakeContrastivePairs(records, out.mined);
  out.encoder = TrainContrastive(HashedEncoder::Initialize(config.encoder), pairs,
                                 config.contrastive, &out.trace);
  return out;
}

PairCosines MeanPairCosines(std::span<const QuantityRecord> records,
                            const MiningResult &mined, const Encoder &encoder) {
  PairCosines out;
  double pos = 0;
  double neg = 0;
  for (const auto *list : {&mined.paraphrase, &mined.confusing}) {
    for (const MinedPair &p : *list) {
      EmbeddingVector a = encoder.Encode(records[p.i].description_text);
      EmbeddingVector b = encoder.Encode(records[p.j].description_text);
      double s;
      try {
        s = CosineScore(a, b);
      } catch (const Error &e) {
        if (e.code() != ErrorCode::kZeroVector) throw;
        continue;
      }
      if (p.paraphrase) {
        pos += s;
        ++out.paraphrase;
      } else {
        neg += s;
        ++out.confusing;
      }
    }
  }
  if (out.paraphrase) out.paraphrase_mean = pos / out.paraphrase;
  if (out.confusing) out.confusing_mean = neg / out.confusing;
  return out;
}

std::vector<QuantityRecord> SelectQueries(std::span<const QuantityRecord> records,
                                          const DocumentSplit &split,
                                          const EvalSettings &settings,
                                          uint64_t seed) {
  std::vector<size_t> eligible;
  for (size_t r : split.test) {
    if (settings.query_filter.Accepts(records[r])) eligible.push_back(r);
  }
  if (settings.max_queries > 0 && eligible.size() > settings.max_queries) {
    std::mt19937_64 rng(seed);
    for (size_t i = eligible.size(); i > 1; --i) {
      std::swap(eligible[i - 1], eligible[static_cast<size_t>(rng() % i)]);
    }
    eligible.resize(settings.max_queries);
    std::sort(eligible.begin(), eligible.end());
  }
  std::vector<QuantityRecord> out;
  out.reserve(eligible.size());
  for (size_t r : eligible) out.push_back(records[r]);
  return out;
}

namespace {

std::vector<QuantityRecord> Subset(const std::vector<QuantityRecord> &records,
                                   const std::vector<size_t> &positions) {
  std::vector<QuantityRecord> out;
  out.reserve(positions.size());
  for (size_t p : positions) out.push_back(records[p]);
  return out;
}

}  // namespace

ExperimentResult RunSyntheticExperiment(const ExperimentOptions &options) {
  const PipelineConfig &config = options.config;
  ExperimentResult result;

  SyntheticCorpus synth = GenerateSyntheticCorpus(options.corpus);
  result.facts = synth.facts;
  result.documents = synth.documents.size();
  result.distractor_fraction = synth.distractor_fraction;

  std::vector<LabeledExample> labeled =
      GenerateLabeledExamples(options.labeled_examples, options.tagger_seed);
  PerceptronTagger tagger = PerceptronTagger::Train(
      labeled, config.tagger.epochs, options.tagger_seed, &result.tagger_report);

  std::vector<Description> predicted;
  std::vector<Description> gold;
  for (const LabeledExample &ex : synth.gold) {
    predicted.push_back(ParseDescription(ex.tokens, ex.pivot, tagger));
    gold.push_back(ex.gold);
  }
  result.parse_strict = SegmentPrf(predicted, gold, MatchMode::kStrict);
  result.parse_partial = SegmentPrf(predicted, gold, MatchMode::kPartial);

  const QuantityExtractor extractor = config.MakeExtractor();
  CorpusBuildOptions build;
  build.evidence_window = config.evidence_window;
  build.terminators = config.terminators;
  Corpus corpus = BuildCorpus(synth.documents, extractor, tagger, build);
  result.records = corpus.records.size();

  DocumentSplit split =
      SplitByDocument(corpus.records, config.eval.train_fraction, config.seed);
  std::vector<QuantityRecord> train = Subset(corpus.records, split.train);
  std::vector<QuantityRecord> test = Subset(corpus.records, split.test);

  RankerTraining training = TrainRanker(train, config);
  result.mining = training.mined.report;
  result.ranker_trace = training.trace;

  InvertedIndex test_index =
      InvertedIndex::Build(DescriptionDocuments(test), config.tokenizer, config.bm25);
  MiningResult heldout = MinePairs(test, test_index, config.mining);
  result.heldout_trained = MeanPairCosines(test, heldout, training.encoder);
  result.heldout_untrained =
      MeanPairCosines(test, heldout, HashedEncoder::Initialize(config.encoder));

  // Out-of-domain encoder for the imported-embedding method.
  SyntheticCorpus other = GenerateSyntheticCorpus(options.pretrain_corpus);
  Corpus other_corpus = BuildCorpus(other.documents, extractor, tagger, build);
  PipelineConfig other_config = config;
  other_config.encoder.seed = config.encoder.seed + 1;
  other_config.contrastive.seed = config.contrastive.seed + 1;
  HashedEncoder pretrained = TrainRanker(other_corpus.records, other_config).encoder;
  EmbeddingTable imported(pretrained.dim());
  for (const QuantityRecord &r : corpus.records) {
    imported.Add(r.record_id, pretrained.Encode(r.description_text));
  }

  std::vector<QuantityRecord> queries =
      SelectQueries(corpus.records, split, config.eval, config.seed);
  EngineModels models;
  models.trained = std::move(training.encoder);
  models.imported = std::move(imported);
  SearchEngine engine(std::move(corpus), config, std::move(models));

  std::vector<std::unique_ptr<RetrievalMethod>> owned;
  std::vector<const RetrievalMethod *> methods;
  for (const MethodInfo &m : MethodCatalog()) {
    owned.push_back(engine.MakeRetrievalMethod(m.id));
    methods.push_back(owned.back().get());
  }
  SuiteInputs inputs;
  inputs.records = engine.corpus().records;
  inputs.sentences = engine.corpus().sentences;
  result.report = RunMethodSuite(queries, methods, inputs, config.eval.cutoff);
  return result;
}

}  // namespace quantret
