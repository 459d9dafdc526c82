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

#include "quantret/eval.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "quantret/error.h"

namespace quantret {
namespace {

void CheckCutoff(size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
}

template <typename PerQuery>
double Mean(std::span<const RelevanceList> lists, size_t n, PerQuery f) {
  CheckCutoff(n);
  if (lists.empty()) return 0.0;
  double total = 0;
  for (const RelevanceList &l : lists) total += f(l, n);
  return total / static_cast<double>(lists.size());
}

std::string Fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", x);
  return buf;
}

}  // namespace

bool AutoLabel(const QuantityRecord &query, const QuantityRecord &result) {
  return SameValue(query.value, result.value);
}

bool AutoLabel(const QuantityRecord &query, const SentenceRecord &sentence) {
  for (const NormalizedValue &v : sentence.values) {
    if (SameValue(query.value, v)) return true;
  }
  return false;
}

double ExistForQuery(const RelevanceList &list, size_t n) {
  CheckCutoff(n);
  size_t m = std::min(n, list.labels.size());
  for (size_t i = 0; i < m; ++i) {
    if (list.labels[i]) return 1.0;
  }
  return 0.0;
}

double ApForQuery(const RelevanceList &list, size_t n) {
  CheckCutoff(n);
  size_t m = std::min(n, list.labels.size());
  double sum = 0;
  size_t hits = 0;
  for (size_t i = 0; i < m; ++i) {
    if (!list.labels[i]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

double NdcgForQuery(const RelevanceList &list, size_t n) {
  CheckCutoff(n);
  size_t m = std::min(n, list.labels.size());
  double dcg = 0;
  for (size_t i = 0; i < m; ++i) {
    if (list.labels[i]) dcg += 1.0 / std::log2(static_cast<double>(i + 2));
  }
  size_t ideal = std::min(n, list.total_relevant);
  double idcg = 0;
  for (size_t i = 0; i < ideal; ++i) {
    idcg += 1.0 / std::log2(static_cast<double>(i + 2));
  }
  return idcg == 0 ? 0.0 : dcg / idcg;
}

double ExistAtN(std::span<const RelevanceList> lists, size_t n) {
  return Mean(lists, n, ExistForQuery);
}

double MapAtN(std::span<const RelevanceList> lists, size_t n) {
  return Mean(lists, n, ApForQuery);
}

double NdcgAtN(std::span<const RelevanceList> lists, size_t n) {
  return Mean(lists, n, NdcgForQuery);
}

PooledQuerySet PoolAndFilter(std::span<const MethodRun> runs, size_t cutoff) {
  CheckCutoff(cutoff);
  PooledQuerySet pooled;
  if (runs.empty()) return pooled;
  const MethodRun &first = runs.front();
  for (const MethodRun &run : runs) {
    bool same = run.queries.size() == first.queries.size();
    for (size_t q = 0; same && q < run.queries.size(); ++q) {
      same = run.queries[q].query_id == first.queries[q].query_id;
    }
    if (!same) {
      throw Error(ErrorCode::kMethodQueryMismatch,
                  "method " + run.method + " was run on a different query set than " +
                      first.method);
    }
    pooled.methods.push_back(run.method);
  }
  pooled.lists.resize(runs.size());
  for (size_t q = 0; q < first.queries.size(); ++q) {
    std::set<std::string> pool;
    for (const MethodRun &run : runs) {
      const std::vector<RankedResult> &hits = run.queries[q].hits;
      for (size_t i = 0; i < std::min(cutoff, hits.size()); ++i) {
        if (hits[i].relevant) pool.insert(hits[i].id);
      }
    }
    if (pool.empty()) {
      ++pooled.dropped;
      continue;
    }
    for (size_t m = 0; m < runs.size(); ++m) {
      const std::vector<RankedResult> &hits = runs[m].queries[q].hits;
      RelevanceList list;
      list.query_id = first.queries[q].query_id;
      list.total_relevant = pool.size();
      for (size_t i = 0; i < std::min(cutoff, hits.size()); ++i) {
        list.labels.push_back(hits[i].relevant ? 1 : 0);
      }
      pooled.lists[m].push_back(std::move(list));
    }
    pooled.query_ids.push_back(first.queries[q].query_id);
    pooled.pools.push_back(std::move(pool));
  }
  return pooled;
}

std::string WinMatrix::ToCsv() const {
  std::ostringstream out;
  out << "method";
  for (const std::string &m : methods) out << ',' << m;
  out << '\n';
  for (size_t i = 0; i < methods.size(); ++i) {
    out << methods[i];
    for (size_t j = 0; j < methods.size(); ++j) {
      out << ',' << (i == j ? std::string() : Fixed(wins[i][j]));
    }
    out << '\n';
  }
  return out.str();
}

WinMatrix ComputeWinMatrix(std::vector<std::string> methods,
                           const std::vector<std::vector<double>> &scores) {
  if (scores.size() != methods.size()) {
    throw Error(ErrorCode::kMethodQueryMismatch, "one score row per method");
  }
  size_t queries = scores.empty() ? 0 : scores.front().size();
  for (const std::vector<double> &row : scores) {
    if (row.size() != queries) {
      throw Error(ErrorCode::kMethodQueryMismatch,
                  "methods were scored on different query sets");
    }
  }
  WinMatrix w;
  w.methods = std::move(methods);
  w.wins.assign(w.methods.size(), std::vector<double>(w.methods.size(), 0.0));
  if (queries == 0) return w;
  for (size_t i = 0; i < w.methods.size(); ++i) {
    for (size_t j = 0; j < w.methods.size(); ++j) {
      if (i == j) continue;
      size_t count = 0;
      for (size_t q = 0; q < queries; ++q) {
        if (scores[i][q] > scores[j][q]) ++count;
      }
      w.wins[i][j] = static_cast<double>(count) / static_cast<double>(queries);
    }
  }
  return w;
}

ManualLabels ManualLabels::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open file", path, 0);
  ManualLabels labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    size_t t1 = line.find('\t');
    size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw Error(ErrorCode::kParseError, "expected query<TAB>result<TAB>label",
                  path, line_no);
    }
    std::string label = line.substr(t2 + 1);
    if (label != "0" && label != "1") {
      throw Error(ErrorCode::kParseError, "label must be 0 or 1", path, line_no);
    }
    labels.Add(line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1),
               label == "1");
  }
  return labels;
}

void ManualLabels::Add(std::string query_id, std::string result_id,
                       bool relevant) {
  labels_[{std::move(query_id), std::move(result_id)}] = relevant;
}

std::optional<bool> ManualLabels::Find(std::string_view query_id,
                                       std::string_view result_id) const {
  auto it = labels_.find(std::pair(std::string(query_id), std::string(result_id)));
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

const MetricsRow *EvalReport::Find(std::string_view method) const {
  for (const MetricsRow &row : rows) {
    if (row.method == method) return &row;
  }
  return nullptr;
}

std::string EvalReport::ToTable() const {
  const std::string n = std::to_string(cutoff);
  char buf[160];
  std::ostringstream out;
  std::snprintf(buf, sizeof(buf), "%-12s %9s %9s %9s %9s\n", "method",
                "Exist@1", ("Exist@" + n).c_str(), ("MAP@" + n).c_str(),
                ("nDCG@" + n).c_str());
  out << buf;
  for (const MetricsRow &row : rows) {
    if (!row.error.empty()) {
      std::snprintf(buf, sizeof(buf), "%-12s ", row.method.c_str());
      out << buf << "failed: " << row.error << '\n';
      continue;
    }
    std::snprintf(buf, sizeof(buf), "%-12s %9.4f %9.4f %9.4f %9.4f\n",
                  row.method.c_str(), row.exist_at_1, row.exist_at_n,
                  row.map_at_n, row.ndcg_at_n);
    out << buf;
  }
  out << "queries: " << queries << " evaluated, " << retained
      << " retained after pooling\n";
  return out.str();
}

std::string EvalReport::ToJson() const {
  using nlohmann::json;
  const std::string n = std::to_string(cutoff);
  json methods = json::array();
  for (const MetricsRow &row : rows) {
    json j = {{"method", row.method}};
    if (row.error.empty()) {
      j["Exist@1"] = row.exist_at_1;
      j["Exist@" + n] = row.exist_at_n;
      j["MAP@" + n] = row.map_at_n;
      j["nDCG@" + n] = row.ndcg_at_n;
    } else {
      j["error"] = row.error;
    }
    methods.push_back(std::move(j));
  }
  return json{{"cutoff", cutoff},
              {"queries", queries},
              {"retained", retained},
              {"methods", methods},
              {"win_matrix",
               {{"methods", win_matrix.methods}, {"wins", win_matrix.wins}}}}
      .dump(2);
}

EvalReport RunMethodSuite(std::span<const QuantityRecord> queries,
                          std::span<const RetrievalMethod *const> methods,
                          const SuiteInputs &inputs, size_t cutoff) {
  CheckCutoff(cutoff);
  std::unordered_map<std::string_view, const QuantityRecord *> records;
  for (const QuantityRecord &r : inputs.records) records.emplace(r.record_id, &r);
  std::unordered_map<std::string, const SentenceRecord *> sentences;
  for (const SentenceRecord &s : inputs.sentences) sentences.emplace(s.id(), &s);

  EvalReport report;
  report.cutoff = cutoff;
  report.queries = queries.size();
  std::vector<MethodRun> runs;
  std::vector<size_t> run_rows;
  for (const RetrievalMethod *method : methods) {
    MetricsRow row;
    row.method = method->id();
    MethodRun run;
    run.method = row.method;
    try {
      for (const QuantityRecord &q : queries) {
        QueryResults results;
        results.query_id = q.record_id;
        const std::string own_sentence = q.sentence_key();
        for (std::string &id : method->Retrieve(q, cutoff)) {
          RankedResult hit;
          if (method->granularity() == Granularity::kSentence) {
            auto it = sentences.find(id);
            if (it == sentences.end()) {
              throw Error(ErrorCode::kNotFound, "unknown sentence id " + id);
            }
            if (it->second->id() == own_sentence) {
              throw Error(ErrorCode::kInvalidArgument,
                          "result " + id + " is the query's own sentence");
            }
            hit.relevant = AutoLabel(q, *it->second);
          } else {
            auto it = records.find(id);
            if (it == records.end()) {
              throw Error(ErrorCode::kNotFound, "unknown record id " + id);
            }
            if (it->second->sentence_key() == own_sentence) {
              throw Error(ErrorCode::kInvalidArgument,
                          "result " + id + " comes from the query's sentence");
            }
            hit.relevant = AutoLabel(q, *it->second);
          }
          if (inputs.manual != nullptr) {
            if (auto label = inputs.manual->Find(q.record_id, id)) {
              hit.relevant = *label;
            }
          }
          hit.id = std::move(id);
          results.hits.push_back(std::move(hit));
        }
        run.queries.push_back(std::move(results));
      }
      runs.push_back(std::move(run));
      run_rows.push_back(report.rows.size());
    } catch (const Error &e) {
      row.error = e.Describe();
    }
    report.rows.push_back(std::move(row));
  }

  PooledQuerySet pooled = PoolAndFilter(runs, cutoff);
  report.retained = pooled.query_ids.size();
  std::vector<std::vector<double>> ndcg(runs.size());
  for (size_t m = 0; m < runs.size(); ++m) {
    const std::vector<RelevanceList> &lists = pooled.lists[m];
    MetricsRow &row = report.rows[run_rows[m]];
    row.exist_at_1 = ExistAtN(lists, 1);
    row.exist_at_n = ExistAtN(lists, cutoff);
    row.map_at_n = MapAtN(lists, cutoff);
    row.ndcg_at_n = NdcgAtN(lists, cutoff);
    for (const RelevanceList &l : lists) ndcg[m].push_back(NdcgForQuery(l, cutoff));
  }
  report.win_matrix = ComputeWinMatrix(pooled.methods, ndcg);
  return report;
}

}  // namespace quantret
