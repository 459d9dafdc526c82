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

#ifndef QUANTRET_PIPELINE_H_
#define QUANTRET_PIPELINE_H_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "quantret/bm25.h"
#include "quantret/config.h"
#include "quantret/corpus.h"
#include "quantret/eval.h"
#include "quantret/ranker.h"
#include "quantret/synthetic.h"
#include "quantret/tagger.h"
#include "quantret/weak_supervision.h"

namespace quantret {

inline constexpr std::string_view kCsBm25 = "cs-bm25";
inline constexpr std::string_view kCqBm25 = "cq-bm25";
inline constexpr std::string_view kCqDense = "cq-dense";
inline constexpr std::string_view kCqDensePretrained = "cq-dense-p";
inline constexpr std::string_view kCqDenseWeak = "cq-dense-ws";

struct MethodInfo {
  std::string id;
  std::string summary;
};

// The five compared retrieval methods, in report order.
const std::vector<MethodInfo> &MethodCatalog();
bool IsKnownMethod(std::string_view id);

struct SearchHit {
  size_t rank = 0;  // 1-based
  double score = 0;
  std::string value;  // quantity surface(s)
  std::string description;
  std::string evidence;
  std::string doc_id;
  int sentence_id = 0;
  std::string record_id;  // sentence id for cs-bm25
};

// Models backing the dense methods. The untrained encoder is always
// available; the others enable their method when present.
struct EngineModels {
  std::optional<HashedEncoder> trained;     // cq-dense-ws
  std::optional<EmbeddingTable> imported;   // cq-dense-p
};

// Immutable retrieval state over one corpus; safe for concurrent reads.
class SearchEngine {
 public:
  SearchEngine(Corpus corpus, const PipelineConfig &config, EngineModels models);

  const Corpus &corpus() const { return corpus_; }
  bool Available(std::string_view method) const;
  std::vector<std::string> AvailableMethods() const;

  // Throws Error(kUnknownMethod) for unknown or unconfigured methods,
  // Error(kUnsupported) for free-text queries on imported embeddings, and
  // Error(kInvalidArgument) when k < 1.
  std::vector<SearchHit> Search(std::string_view method, std::string_view query,
                                size_t k) const;

  const QuantityRecord *FindRecord(std::string_view record_id) const;
  SearchHit RecordHit(const QuantityRecord &record) const;

  // Evaluation adapter: queries are corpus records and results from the
  // query's own sentence are left out.
  std::unique_ptr<RetrievalMethod> MakeRetrievalMethod(std::string_view method) const;

 private:
  friend class EngineRetrieval;

  struct RefHit {
    uint32_t ref;
    double score;
  };
  std::vector<RefHit> Rank(std::string_view method, std::string_view text,
                           const QuantityRecord *query_record, size_t k) const;
  const EmbeddingVector *ImportedVector(std::string_view record_id) const;

  Corpus corpus_;
  PipelineConfig config_;
  HashedEncoder untrained_;
  EngineModels models_;
  InvertedIndex description_index_;
  InvertedIndex sentence_index_;
  DenseIndex untrained_index_;
  DenseIndex trained_index_;
  DenseIndex imported_index_;
  std::unordered_map<std::string, size_t> record_lookup_;
  std::unordered_map<std::string, size_t> sentence_records_;  // records per sentence
};

std::vector<ContrastivePair> MakeContrastivePairs(
    std::span<const QuantityRecord> records, const MiningResult &mined);

struct RankerTraining {
  HashedEncoder encoder;
  MiningResult mined;
  ContrastiveTrace trace;
};

// Index, mine, and train the encoder over `records`.
RankerTraining TrainRanker(std::span<const QuantityRecord> records,
                           const PipelineConfig &config);

// Held-out pair statistics under one encoder.
struct PairCosines {
  double paraphrase_mean = 0;
  double confusing_mean = 0;
  size_t paraphrase = 0;
  size_t confusing = 0;
};
PairCosines MeanPairCosines(std::span<const QuantityRecord> records,
                            const MiningResult &mined, const Encoder &encoder);

// Test-split records that pass the query filter, optionally down-sampled
// with `seed` (order preserved).
std::vector<QuantityRecord> SelectQueries(std::span<const QuantityRecord> records,
                                          const DocumentSplit &split,
                                          const EvalSettings &settings,
                                          uint64_t seed);

struct ExperimentOptions {
  SyntheticCorpusSpec corpus;
  // Independent corpus for the out-of-domain encoder behind cq-dense-p.
  SyntheticCorpusSpec pretrain_corpus;
  size_t labeled_examples = 1500;
  uint64_t tagger_seed = 7;
  PipelineConfig config;
};

struct ExperimentResult {
  EvalReport report;
  MiningReport mining;
  PairCosines heldout_trained;
  PairCosines heldout_untrained;
  ContrastiveTrace ranker_trace;
  TaggerTrainingReport tagger_report;
  PrfScores parse_strict;
  PrfScores parse_partial;
  size_t facts = 0;
  size_t documents = 0;
  size_t records = 0;
  double distractor_fraction = 0;
};

// Generate, train the tagger, build C_s and C_q, split by document, mine
// and train on the train side, and evaluate all five methods on test-side
// queries.
ExperimentResult RunSyntheticExperiment(const ExperimentOptions &options);

}  // namespace quantret

#endif  // QUANTRET_PIPELINE_H_
