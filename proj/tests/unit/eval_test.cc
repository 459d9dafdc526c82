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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles/oracles.h"
#include "quantret/error.h"
#include "test_util.h"

namespace quantret {
namespace {

using testing::MakeRecord;

RelevanceList List(std::vector<int> labels, size_t pool) {
  return {"q", std::move(labels), pool};
}

// Replays canned result lists keyed by query record id.
class CannedMethod : public RetrievalMethod {
 public:
  CannedMethod(std::string id, Granularity g,
               std::map<std::string, std::vector<std::string>> results)
      : id_(std::move(id)), granularity_(g), results_(std::move(results)) {}
  std::string id() const override { return id_; }
  Granularity granularity() const override { return granularity_; }
  std::vector<std::string> Retrieve(const QuantityRecord &query,
                                    size_t k) const override {
    if (query.record_id == "boom") throw Error(ErrorCode::kUnsupported, "no backend");
    std::vector<std::string> out = results_.count(query.record_id)
                                       ? results_.at(query.record_id)
                                       : std::vector<std::string>{};
    if (out.size() > k) out.resize(k);
    return out;
  }

 private:
  std::string id_;
  Granularity granularity_;
  std::map<std::string, std::vector<std::string>> results_;
};

TEST(MetricsTest, ExistExamples) {
  RelevanceList l = List({0, 1, 0}, 1);
  EXPECT_DOUBLE_EQ(ExistForQuery(l, 1), 0.0);
  EXPECT_DOUBLE_EQ(ExistForQuery(l, 3), 1.0);
  EXPECT_DOUBLE_EQ(ExistForQuery(List({0, 0, 0}, 2), 3), 0.0);
  EXPECT_THROW(ExistForQuery(l, 0), Error);
}

TEST(MetricsTest, ApExamples) {
  EXPECT_NEAR(ApForQuery(List({1, 0, 1, 0}, 2), 4), 5.0 / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(ApForQuery(List({1, 1, 1}, 3), 3), 1.0);
  // Relevant in the pool but none retrieved.
  EXPECT_DOUBLE_EQ(ApForQuery(List({0, 0}, 4), 2), 0.0);
  EXPECT_DOUBLE_EQ(ApForQuery(List({0, 1}, 1), 1), 0.0);
}

TEST(MetricsTest, NdcgExamples) {
  EXPECT_NEAR(NdcgForQuery(List({0, 1}, 1), 2), 1.0 / std::log2(3.0), 1e-15);
  EXPECT_NEAR(NdcgForQuery(List({0, 1}, 1), 2), 0.6309, 1e-4);
  EXPECT_DOUBLE_EQ(NdcgForQuery(List({1, 1, 0}, 2), 3), 1.0);
  // The ideal ranking counts pool relevants beyond the list, capped at n.
  EXPECT_NEAR(NdcgForQuery(List({1, 0}, 5), 2), 1.0 / (1.0 + 1.0 / std::log2(3.0)),
              1e-15);
}

TEST(MetricsTest, MeansOverQueries) {
  std::vector<RelevanceList> lists = {List({1, 0}, 1), List({0, 0}, 1),
                                      List({0, 1}, 1)};
  EXPECT_NEAR(ExistAtN(lists, 1), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(ExistAtN(lists, 2), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(MapAtN(lists, 2), (1.0 + 0.0 + 0.5) / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(ExistAtN({}, 3), 0.0);
}

TEST(MetricsTest, MatchNaiveOraclesOnRandomLists) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 5000; ++trial) {
    size_t len = rng() % 21;
    std::vector<int> labels(len);
    size_t ones = 0;
    for (int &x : labels) ones += (x = static_cast<int>(rng() % 2));
    size_t pool = ones + rng() % 4;
    size_t n = 1 + rng() % 25;
    RelevanceList l = List(labels, pool);
    EXPECT_NEAR(ExistForQuery(l, n), oracle::NaiveExist(labels, n), 1e-12);
    EXPECT_NEAR(ApForQuery(l, n), oracle::NaiveAp(labels, n), 1e-12);
    double ndcg = NdcgForQuery(l, n);
    EXPECT_NEAR(ndcg, oracle::NaiveNdcg(labels, pool, n), 1e-12);
    EXPECT_GE(ndcg, 0.0);
    EXPECT_LE(ndcg, 1.0 + 1e-15);
    EXPECT_LE(ExistForQuery(l, n), ExistForQuery(l, n + 1));
  }
}

TEST(MetricsTest, SortedPermutationMaximizesAp) {
  for (size_t len = 1; len <= 6; ++len) {
    for (size_t mask = 0; mask < (1u << len); ++mask) {
      std::vector<int> labels(len);
      for (size_t i = 0; i < len; ++i) labels[i] = (mask >> i) & 1;
      std::vector<int> best = labels;
      std::sort(best.rbegin(), best.rend());
      double best_ap = ApForQuery(List(best, len), len);
      std::vector<int> perm = labels;
      std::sort(perm.begin(), perm.end());
      do {
        EXPECT_LE(ApForQuery(List(perm, len), len), best_ap + 1e-15);
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }
}

TEST(PoolingTest, UnionRetentionAndMismatch) {
  MethodRun a{"a", {{"q1", {{"x", false}, {"y", true}}}, {"q2", {{"x", false}}}}};
  MethodRun b{"b", {{"q1", {{"z", true}, {"y", true}}}, {"q2", {{"w", false}}}}};
  MethodRun c{"c", {{"q1", {}}, {"q2", {}}}};
  std::vector<MethodRun> runs = {a, b, c};
  PooledQuerySet pooled = PoolAndFilter(runs, 10);
  EXPECT_EQ(pooled.methods, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(pooled.query_ids, std::vector<std::string>{"q1"});
  EXPECT_EQ(pooled.dropped, 1u);
  EXPECT_EQ(pooled.pools[0], (std::set<std::string>{"y", "z"}));
  for (size_t m = 0; m < 3; ++m) EXPECT_EQ(pooled.lists[m][0].total_relevant, 2u);
  EXPECT_EQ(pooled.lists[0][0].labels, (std::vector<int>{0, 1}));
  EXPECT_TRUE(pooled.lists[2][0].labels.empty());

  // One method, one relevant hit: retained with a pool of one.
  std::vector<MethodRun> single = {
      MethodRun{"s", {{"q1", {{"x", false}, {"y", true}}}}}};
  EXPECT_EQ(PoolAndFilter(single, 10).pools[0].size(), 1u);
  // The cutoff bounds what enters the pool.
  EXPECT_EQ(PoolAndFilter(single, 1).query_ids.size(), 0u);

  MethodRun odd{"d", {{"q9", {}}}};
  std::vector<MethodRun> mismatched = {a, odd};
  try {
    PoolAndFilter(mismatched, 10);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kMethodQueryMismatch);
  }
}

TEST(WinMatrixTest, Examples) {
  std::vector<double> a = {1, 1, 1, 0, 0, .5, .5, .5, .5, .5};
  std::vector<double> b = {0, 0, 0, 1, 1, .5, .5, .5, .5, .5};
  WinMatrix w = ComputeWinMatrix({"A", "B", "A2"}, {a, b, a});
  EXPECT_DOUBLE_EQ(w.wins[0][1], 0.3);
  EXPECT_DOUBLE_EQ(w.wins[1][0], 0.2);
  EXPECT_DOUBLE_EQ(w.wins[0][2], 0.0);
  EXPECT_DOUBLE_EQ(w.wins[2][0], 0.0);
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(w.wins[i][i], 0.0);
    for (size_t j = 0; j < 3; ++j) EXPECT_LE(w.wins[i][j] + w.wins[j][i], 1.0);
  }
  EXPECT_EQ(w.ToCsv(),
            "method,A,B,A2\nA,,0.3000,0.0000\nB,0.2000,,0.2000\nA2,0.0000,0.3000,\n");
  EXPECT_THROW(ComputeWinMatrix({"A"}, {a, b}), Error);
  EXPECT_THROW(ComputeWinMatrix({"A", "B"}, {a, {1.0}}), Error);
}

TEST(AutoLabelTest, RecordVersusSentenceGranularity) {
  QuantityRecord query = MakeRecord("q", "Acme revenue 2020", "5.0 million yuan");
  QuantityRecord same = MakeRecord("r1", "Acme revenue", "5 million yuan");
  QuantityRecord other = MakeRecord("r2", "Borealis revenue", "3.2 million yuan");
  EXPECT_TRUE(AutoLabel(query, same));
  EXPECT_FALSE(AutoLabel(query, other));

  QuantityExtractor extractor;
  SentenceRecord sentence;
  sentence.doc_id = "d";
  sentence.tokens = MakeTokens({"Borealis", "had", "3.2", "million", "yuan", "and",
                                "Acme", "5.0", "million", "yuan"});
  sentence.quantities = extractor.Extract(sentence.tokens);
  for (const RawQuantity &q : sentence.quantities) {
    sentence.values.push_back(extractor.Normalize(q.surface));
  }
  ASSERT_EQ(sentence.values.size(), 2u);
  // The Borealis record alone is irrelevant; its sentence is relevant
  // because a sibling quantity matches.
  EXPECT_TRUE(AutoLabel(query, sentence));
  sentence.values.pop_back();
  EXPECT_FALSE(AutoLabel(query, sentence));
}

class SuiteTest : public ::testing::Test {
 protected:
  void SetUp() override {
    records_ = {MakeRecord("q1", "Acme revenue 2020", "5 million", "dq", 0),
                MakeRecord("a", "Acme revenue", "5.0 million", "d1", 0),
                MakeRecord("b", "Borealis revenue", "3 million", "d1", 1),
                MakeRecord("c", "Acme sales 2020", "5 million", "d2", 0),
                MakeRecord("q2", "Delta staff", "40 people", "dq", 1)};
    for (const QuantityRecord &r : records_) {
      SentenceRecord s;
      s.doc_id = r.doc_id;
      s.sentence_id = r.sentence_id;
      s.tokens = MakeTokens({r.surface});
      s.values = {r.value};
      sentences_.push_back(s);
    }
    queries_ = {records_[0], records_[4]};
  }
  SuiteInputs Inputs(const ManualLabels *manual = nullptr) const {
    return {records_, sentences_, manual};
  }

  std::vector<QuantityRecord> records_;
  std::vector<SentenceRecord> sentences_;
  std::vector<QuantityRecord> queries_;
};

TEST_F(SuiteTest, MetricsRowsAndPooling) {
  CannedMethod good("good", Granularity::kRecord, {{"q1", {"a", "b", "c"}}});
  CannedMethod poor("poor", Granularity::kRecord, {{"q1", {"b", "c"}}});
  CannedMethod sent("sent", Granularity::kSentence, {{"q1", {"d2:0"}}});
  std::vector<const RetrievalMethod *> methods = {&good, &poor, &sent};
  EvalReport report = RunMethodSuite(queries_, methods, Inputs(), 3);
  EXPECT_EQ(report.queries, 2u);
  EXPECT_EQ(report.retained, 1u);  // q2 has no relevant result anywhere
  ASSERT_EQ(report.rows.size(), 3u);
  const MetricsRow *g = report.Find("good");
  ASSERT_NE(g, nullptr);
  EXPECT_DOUBLE_EQ(g->exist_at_1, 1.0);
  EXPECT_NEAR(g->map_at_n, (1.0 + 2.0 / 3.0) / 2.0, 1e-15);
  // Pool for q1: {a, c, d2:0}; good has hits at ranks 1 and 3.
  double idcg = 1 + 1 / std::log2(3.0) + 0.5;
  EXPECT_NEAR(g->ndcg_at_n, (1 + 0.5) / idcg, 1e-12);
  EXPECT_DOUBLE_EQ(report.Find("poor")->exist_at_1, 0.0);
  EXPECT_DOUBLE_EQ(report.Find("sent")->exist_at_1, 1.0);
  EXPECT_DOUBLE_EQ(report.win_matrix.wins[0][1], 1.0);
  EXPECT_EQ(report.Find("absent"), nullptr);
  EXPECT_NE(report.ToTable().find("nDCG@3"), std::string::npos);
  EXPECT_NE(report.ToJson().find("\"MAP@3\""), std::string::npos);
}

TEST_F(SuiteTest, SingleMethodIsPlainMetricComputation) {
  CannedMethod only("only", Granularity::kRecord, {{"q1", {"b", "a"}}});
  std::vector<const RetrievalMethod *> methods = {&only};
  EvalReport report = RunMethodSuite(queries_, methods, Inputs(), 10);
  RelevanceList l = List({0, 1}, 1);
  EXPECT_DOUBLE_EQ(report.rows[0].map_at_n, ApForQuery(l, 10));
  EXPECT_DOUBLE_EQ(report.rows[0].ndcg_at_n, NdcgForQuery(l, 10));
}

TEST_F(SuiteTest, ManualLabelsOverrideAutomaticOnes) {
  CannedMethod m("m", Granularity::kRecord, {{"q1", {"b", "a"}}});
  std::vector<const RetrievalMethod *> methods = {&m};
  ManualLabels manual;
  manual.Add("q1", "b", true);
  manual.Add("q1", "a", false);
  EvalReport report = RunMethodSuite(queries_, methods, Inputs(&manual), 10);
  EXPECT_DOUBLE_EQ(report.rows[0].exist_at_1, 1.0);
  EXPECT_DOUBLE_EQ(report.rows[0].map_at_n, 1.0);
}

TEST_F(SuiteTest, FailingMethodGetsErrorRowAndSuiteContinues) {
  CannedMethod ok("ok", Granularity::kRecord, {{"q1", {"a"}}});
  CannedMethod bad("bad", Granularity::kRecord, {{"q1", {"no-such-record"}}});
  std::vector<const RetrievalMethod *> methods = {&ok, &bad};
  EvalReport report = RunMethodSuite(queries_, methods, Inputs(), 10);
  EXPECT_TRUE(report.Find("ok")->error.empty());
  EXPECT_NE(report.Find("bad")->error.find("not_found"), std::string::npos);
  EXPECT_EQ(report.win_matrix.methods, std::vector<std::string>{"ok"});
  EXPECT_NE(report.ToTable().find("failed"), std::string::npos);
}

TEST_F(SuiteTest, ReturningTheQuerySentenceIsAnError) {
  CannedMethod self_record("self", Granularity::kRecord, {{"q1", {"q1"}}});
  CannedMethod self_sentence("selfs", Granularity::kSentence, {{"q1", {"dq:0"}}});
  std::vector<const RetrievalMethod *> methods = {&self_record, &self_sentence};
  EvalReport report = RunMethodSuite(queries_, methods, Inputs(), 10);
  for (const MetricsRow &row : report.rows) {
    EXPECT_NE(row.error.find("invalid_argument"), std::string::npos) << row.method;
  }
}

TEST(ManualLabelsTest, LoadFixtureAndErrors) {
  ManualLabels labels = ManualLabels::Load(testing::FixturePath("manual_labels.tsv"));
  EXPECT_EQ(labels.size(), 6u);
  EXPECT_EQ(labels.Find("doc_a:0:0", "doc_b:0:0"), true);
  EXPECT_EQ(labels.Find("doc_a:0:0", "doc_b:1:0"), false);
  EXPECT_FALSE(labels.Find("doc_a:0:0", "doc_c:0:0").has_value());

  testing::TempDir dir;
  testing::WriteAll(dir.file("bad.tsv"), "q\tr\t1\nq\tr\tyes\n");
  try {
    ManualLabels::Load(dir.file("bad.tsv"));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_EQ(e.line(), 2);
  }
  testing::WriteAll(dir.file("bad.tsv"), "only two\tfields\n");
  EXPECT_THROW(ManualLabels::Load(dir.file("bad.tsv")), Error);
}

}  // namespace
}  // namespace quantret
