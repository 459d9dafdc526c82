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

#ifndef QUANTRET_WEAK_SUPERVISION_H_
#define QUANTRET_WEAK_SUPERVISION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quantret/bm25.h"
#include "quantret/corpus.h"

namespace quantret {

// A textually similar record pair. Positions index the mined record list,
// with i < j. `anchor` is the query record that surfaced the pair first.
struct MinedPair {
  size_t i = 0;
  size_t j = 0;
  size_t anchor = 0;
  double score = 0;  // best BM25 score over both discovery directions
  bool paraphrase = false;

  bool operator==(const MinedPair &other) const = default;
};

// Which records act as mining queries.
struct QueryFilter {
  bool enabled = false;
  size_t min_segments = 2;
  int min_sig_digits = 2;

  bool Accepts(const QuantityRecord &record) const;
};

struct MiningOptions {
  size_t k = 10;
  std::optional<double> min_score;
  QueryFilter filter;
};

struct MiningReport {
  size_t queries = 0;
  size_t raw_candidates = 0;   // per-query hits after self removal
  size_t candidate_pairs = 0;  // after symmetric deduplication
  size_t paraphrase = 0;
  size_t confusing = 0;

  std::string ToJson() const;
  bool operator==(const MiningReport &other) const = default;
};

struct MiningResult {
  std::vector<MinedPair> paraphrase;  // sorted by (i, j)
  std::vector<MinedPair> confusing;
  MiningReport report;
};

// Value-coincidence mining: each record queries the index with its
// description; its top-k other records are labeled by SameValue. Throws
// Error(kIndexCorpusMismatch) unless the index was built over `records` in
// order, and Error(kInvalidArgument) when k < 1.
MiningResult MinePairs(std::span<const QuantityRecord> records,
                       const InvertedIndex &index,
                       const MiningOptions &options = {});

// Line-delimited {"i", "j", "label", "score", "query"} with record ids.
void SavePairs(const std::string &path, std::span<const QuantityRecord> records,
               const MiningResult &result);
// Maps ids back to positions in `records`.
MiningResult LoadPairs(const std::string &path,
                       std::span<const QuantityRecord> records);

// 1 / (1 + N / (V^l * 10^s * r)), evaluated in log space. Throws
// Error(kDomainError) unless every argument is positive.
double EstimateSameFactProbability(double records, double vocabulary,
                                   double terms, double sig_digits,
                                   double records_per_fact);

struct DocumentSplit {
  std::vector<std::string> train_docs;  // sorted
  std::vector<std::string> test_docs;
  std::vector<size_t> train;            // record positions, ascending
  std::vector<size_t> test;
};

// Shuffles the distinct doc ids with `seed` and assigns the first
// floor(n * fraction + 0.5) to train. Throws Error(kInvalidArgument) unless
// 0 < fraction < 1.
DocumentSplit SplitByDocument(std::span<const QuantityRecord> records,
                              double train_fraction, uint64_t seed);
DocumentSplit SplitDocumentIds(std::vector<std::string> doc_ids,
                               double train_fraction, uint64_t seed);

}  // namespace quantret

#endif  // QUANTRET_WEAK_SUPERVISION_H_
