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

#ifndef QUANTRET_EVAL_H_
#define QUANTRET_EVAL_H_

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "quantret/corpus.h"

namespace quantret {

enum class Granularity { kRecord, kSentence };

// Record mode: the two values coincide.
bool AutoLabel(const QuantityRecord &query, const QuantityRecord &result);
// Sentence mode: any quantity of the sentence coincides with the query.
bool AutoLabel(const QuantityRecord &query, const SentenceRecord &sentence);

// Binary labels of one ranked list, best first.
struct RelevanceList {
  std::string query_id;
  std::vector<int> labels;
  size_t total_relevant = 0;  // |REL| of the pooled set
};

// Per-query metrics over the first n labels. n must be >= 1.
double ExistForQuery(const RelevanceList &list, size_t n);
// Sum_i P@i R_i / Sum_i R_i over the first n; 0 when the list holds no
// relevant result.
double ApForQuery(const RelevanceList &list, size_t n);
// DCG@n / IDCG@n with log2(i + 1) discounts; IDCG sums min(|REL|, n) ideal
// gains. 0 when |REL| is 0.
double NdcgForQuery(const RelevanceList &list, size_t n);

// Means over queries; 0 for no queries.
double ExistAtN(std::span<const RelevanceList> lists, size_t n);
double MapAtN(std::span<const RelevanceList> lists, size_t n);
double NdcgAtN(std::span<const RelevanceList> lists, size_t n);

struct RankedResult {
  std::string id;
  bool relevant = false;
};

struct QueryResults {
  std::string query_id;
  std::vector<RankedResult> hits;
};

struct MethodRun {
  std::string method;
  std::vector<QueryResults> queries;
};

struct PooledQuerySet {
  std::vector<std::string> methods;
  std::vector<std::string> query_ids;          // retained queries
  std::vector<std::set<std::string>> pools;    // relevant ids per query
  std::vector<std::vector<RelevanceList>> lists;  // [method][query]
  size_t dropped = 0;
};

// Pools the relevant hits within `cutoff` across methods and drops queries
// none of them answered. Throws Error(kMethodQueryMismatch) unless every run
// covers the same queries in the same order.
PooledQuerySet PoolAndFilter(std::span<const MethodRun> runs, size_t cutoff);

struct WinMatrix {
  std::vector<std::string> methods;
  // wins[i][j]: fraction of queries where method i's nDCG beats method j's.
  std::vector<std::vector<double>> wins;

  std::string ToCsv() const;
};

// scores[m][q] is method m's nDCG on query q.
WinMatrix ComputeWinMatrix(std::vector<std::string> methods,
                           const std::vector<std::vector<double>> &scores);

// Hand labels, "query_id<TAB>result_id<TAB>0|1" per line.
class ManualLabels {
 public:
  static ManualLabels Load(const std::string &path);
  void Add(std::string query_id, std::string result_id, bool relevant);
  std::optional<bool> Find(std::string_view query_id,
                           std::string_view result_id) const;
  size_t size() const { return labels_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, bool, std::less<>> labels_;
};

// A retrieval backend under evaluation. Retrieve() must leave out every
// result that comes from the query's own sentence.
class RetrievalMethod {
 public:
  virtual ~RetrievalMethod() = default;
  virtual std::string id() const = 0;
  virtual Granularity granularity() const = 0;
  virtual std::vector<std::string> Retrieve(const QuantityRecord &query,
                                            size_t k) const = 0;
};

struct MetricsRow {
  std::string method;
  double exist_at_1 = 0;
  double exist_at_n = 0;  // n is the report cutoff
  double map_at_n = 0;
  double ndcg_at_n = 0;
  std::string error;  // non-empty when the method failed
};

struct EvalReport {
  size_t cutoff = 10;
  size_t queries = 0;          // evaluated queries
  size_t retained = 0;         // after pooling
  std::vector<MetricsRow> rows;
  WinMatrix win_matrix;

  const MetricsRow *Find(std::string_view method) const;
  std::string ToTable() const;
  std::string ToJson() const;
};

struct SuiteInputs {
  std::span<const QuantityRecord> records;
  std::span<const SentenceRecord> sentences;
  const ManualLabels *manual = nullptr;  // overrides automatic labels
};

// Runs every method on every query, labels, pools, and scores. A method
// that throws is reported in its row and left out of pooling.
EvalReport RunMethodSuite(std::span<const QuantityRecord> queries,
                          std::span<const RetrievalMethod *const> methods,
                          const SuiteInputs &inputs, size_t cutoff = 10);

}  // namespace quantret

#endif  // QUANTRET_EVAL_H_
