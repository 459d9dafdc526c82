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

#include "quantret/weak_supervision.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "quantret/error.h"

namespace quantret {

using nlohmann::json;

bool QueryFilter::Accepts(const QuantityRecord &record) const {
  if (!enabled) return true;
  return record.segments.size() >= min_segments &&
         record.value.sig_digits >= min_sig_digits;
}

std::string MiningReport::ToJson() const {
  return json{{"queries", queries},
              {"raw_candidates", raw_candidates},
              {"candidate_pairs", candidate_pairs},
              {"paraphrase", paraphrase},
              {"confusing", confusing}}
      .dump(2);
}

MiningResult MinePairs(std::span<const QuantityRecord> records,
                       const InvertedIndex &index,
                       const MiningOptions &options) {
  if (options.k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (index.size() != records.size()) {
    throw Error(ErrorCode::kIndexCorpusMismatch,
                "index holds " + std::to_string(index.size()) +
                    " records, corpus " + std::to_string(records.size()));
  }
  for (size_t r = 0; r < records.size(); ++r) {
    if (index.id(static_cast<uint32_t>(r)) != records[r].record_id) {
      throw Error(ErrorCode::kIndexCorpusMismatch,
                  "record " + std::to_string(r) + " is " + records[r].record_id +
                      " in the corpus but " +
                      index.id(static_cast<uint32_t>(r)) + " in the index");
    }
  }

  MiningResult result;
  std::map<std::pair<size_t, size_t>, MinedPair> pairs;
  for (size_t q = 0; q < records.size(); ++q) {
    const QuantityRecord &query = records[q];
    if (!options.filter.Accepts(query)) continue;
    ++result.report.queries;
    std::vector<ScoredHit> hits =
        index.Search(query.description_text, options.k + 1);
    size_t kept = 0;
    for (const ScoredHit &hit : hits) {
      if (hit.ref == q) continue;
      if (kept == options.k) break;
      ++kept;
      if (options.min_score && hit.score < *options.min_score) continue;
      ++result.report.raw_candidates;
      size_t i = std::min<size_t>(q, hit.ref);
      size_t j = std::max<size_t>(q, hit.ref);
      auto [it, inserted] = pairs.try_emplace({i, j});
      MinedPair &pair = it->second;
      if (inserted) {
        pair.i = i;
        pair.j = j;
        pair.anchor = q;
        pair.score = hit.score;
        pair.paraphrase = SameValue(records[i].value, records[j].value);
      } else {
        pair.score = std::max(pair.score, hit.score);
      }
    }
  }
  for (auto &[key, pair] : pairs) {
    (pair.paraphrase ? result.paraphrase : result.confusing).push_back(pair);
  }
  result.report.candidate_pairs = pairs.size();
  result.report.paraphrase = result.paraphrase.size();
  result.report.confusing = result.confusing.size();
  return result;
}

void SavePairs(const std::string &path, std::span<const QuantityRecord> records,
               const MiningResult &result) {
  std::vector<const MinedPair *> all;
  for (const MinedPair &p : result.paraphrase) all.push_back(&p);
  for (const MinedPair &p : result.confusing) all.push_back(&p);
  std::sort(all.begin(), all.end(), [](const MinedPair *a, const MinedPair *b) {
    return std::pair(a->i, a->j) < std::pair(b->i, b->j);
  });
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write file", path, 0);
  for (const MinedPair *p : all) {
    out << json{{"i", records[p->i].record_id},
                {"j", records[p->j].record_id},
                {"label", p->paraphrase ? "paraphrase" : "confusing"},
                {"score", p->score},
                {"query", records[p->anchor].record_id}}
               .dump()
        << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, "write failed", path, 0);
}

MiningResult LoadPairs(const std::string &path,
                       std::span<const QuantityRecord> records) {
  std::unordered_map<std::string, size_t> position;
  for (size_t r = 0; r < records.size(); ++r) {
    position.emplace(records[r].record_id, r);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open file", path, 0);
  MiningResult result;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    MinedPair pair;
    std::string label;
    try {
      json j = json::parse(line);
      auto lookup = [&](const std::string &key) {
        auto it = position.find(j.at(key).get<std::string>());
        if (it == position.end()) {
          throw Error(ErrorCode::kNotFound,
                      "unknown record id " + j.at(key).get<std::string>(), path,
                      line_no);
        }
        return it->second;
      };
      pair.i = lookup("i");
      pair.j = lookup("j");
      pair.anchor = lookup("query");
      pair.score = j.at("score").get<double>();
      label = j.at("label").get<std::string>();
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kParseError, e.what(), path, line_no);
    }
    if (label != "paraphrase" && label != "confusing") {
      throw Error(ErrorCode::kParseError, "unknown label " + label, path, line_no);
    }
    if (pair.i > pair.j) std::swap(pair.i, pair.j);
    pair.paraphrase = label == "paraphrase";
    (pair.paraphrase ? result.paraphrase : result.confusing).push_back(pair);
  }
  result.report.candidate_pairs =
      result.paraphrase.size() + result.confusing.size();
  result.report.paraphrase = result.paraphrase.size();
  result.report.confusing = result.confusing.size();
  return result;
}

double EstimateSameFactProbability(double records, double vocabulary,
                                   double terms, double sig_digits,
                                   double records_per_fact) {
  for (double x : {records, vocabulary, terms, sig_digits, records_per_fact}) {
    if (!(x > 0) || !std::isfinite(x)) {
      throw Error(ErrorCode::kDomainError,
                  "estimator arguments must be positive and finite");
    }
  }
  double log_ratio = std::log(records) - terms * std::log(vocabulary) -
                     sig_digits * std::log(10.0) - std::log(records_per_fact);
  if (log_ratio > 700) return 0.0;
  return 1.0 / (1.0 + std::exp(log_ratio));
}

DocumentSplit SplitDocumentIds(std::vector<std::string> doc_ids,
                               double train_fraction, uint64_t seed) {
  if (!(train_fraction > 0 && train_fraction < 1)) {
    throw Error(ErrorCode::kInvalidArgument,
                "train fraction must lie strictly between 0 and 1");
  }
  std::sort(doc_ids.begin(), doc_ids.end());
  doc_ids.erase(std::unique(doc_ids.begin(), doc_ids.end()), doc_ids.end());
  // Explicit Fisher-Yates so the split does not depend on std::shuffle.
  std::mt19937_64 rng(seed);
  for (size_t i = doc_ids.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng() % i);
    std::swap(doc_ids[i - 1], doc_ids[j]);
  }
  size_t n_train = static_cast<size_t>(
      std::floor(static_cast<double>(doc_ids.size()) * train_fraction + 0.5));
  n_train = std::min(n_train, doc_ids.size());
  DocumentSplit split;
  split.train_docs.assign(doc_ids.begin(),
                          doc_ids.begin() + static_cast<long>(n_train));
  split.test_docs.assign(doc_ids.begin() + static_cast<long>(n_train),
                         doc_ids.end());
  std::sort(split.train_docs.begin(), split.train_docs.end());
  std::sort(split.test_docs.begin(), split.test_docs.end());
  return split;
}

DocumentSplit SplitByDocument(std::span<const QuantityRecord> records,
                              double train_fraction, uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const QuantityRecord &r : records) ids.push_back(r.doc_id);
  DocumentSplit split = SplitDocumentIds(std::move(ids), train_fraction, seed);
  std::set<std::string> train(split.train_docs.begin(), split.train_docs.end());
  for (size_t r = 0; r < records.size(); ++r) {
    (train.count(records[r].doc_id) ? split.train : split.test).push_back(r);
  }
  return split;
}

}  // namespace quantret
