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

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles/oracles.h"
#include "quantret/error.h"
#include "test_util.h"

namespace quantret {
namespace {

using testing::MakeRecord;

InvertedIndex IndexOf(const std::vector<QuantityRecord> &records) {
  return InvertedIndex::Build(DescriptionDocuments(records));
}

// Background records that keep idf positive for the terms under test.
void AddFiller(std::vector<QuantityRecord> &records, size_t n) {
  for (size_t f = 0; f < n; ++f) {
    records.push_back(MakeRecord("f" + std::to_string(f),
                                 "filler" + std::to_string(f),
                                 std::to_string(100 + f) + " people"));
  }
}

TEST(MinePairsTest, SameValuePairIsParaphraseOtherIsConfusing) {
  std::vector<QuantityRecord> records = {
      MakeRecord("x1", "2020 revenue of Acme", "5.0 million yuan"),
      MakeRecord("x2", "Acme total revenue in 2020", "5.0 million yuan"),
      MakeRecord("y1", "2020 revenue of Borealis", "3.2 million yuan")};
  AddFiller(records, 4);
  MiningResult result = MinePairs(records, IndexOf(records), {.k = 2});
  ASSERT_EQ(result.paraphrase.size(), 1u);
  EXPECT_EQ(result.paraphrase[0].i, 0u);
  EXPECT_EQ(result.paraphrase[0].j, 1u);
  EXPECT_TRUE(result.paraphrase[0].paraphrase);
  ASSERT_FALSE(result.confusing.empty());
  for (const MinedPair &p : result.confusing) {
    EXPECT_TRUE(p.i == 2 || p.j == 2);
    EXPECT_FALSE(p.paraphrase);
  }
}

TEST(MinePairsTest, SingleRecordYieldsNothing) {
  std::vector<QuantityRecord> records = {MakeRecord("only", "Acme revenue", "5 yuan")};
  MiningResult result = MinePairs(records, IndexOf(records));
  EXPECT_TRUE(result.paraphrase.empty());
  EXPECT_TRUE(result.confusing.empty());
  EXPECT_EQ(result.report.queries, 1u);
  EXPECT_EQ(result.report.candidate_pairs, 0u);
}

TEST(MinePairsTest, ArgumentAndIndexChecks) {
  std::vector<QuantityRecord> records = {MakeRecord("a", "Acme revenue", "5 yuan"),
                                         MakeRecord("b", "Acme profit", "2 yuan")};
  InvertedIndex index = IndexOf(records);
  try {
    MinePairs(records, index, {.k = 0});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  std::vector<QuantityRecord> swapped = {records[1], records[0]};
  try {
    MinePairs(swapped, index);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kIndexCorpusMismatch);
  }
  std::vector<QuantityRecord> shorter = {records[0]};
  EXPECT_THROW(MinePairs(shorter, index), Error);
}

struct RandomCorpus {
  std::vector<QuantityRecord> records;
  std::vector<std::vector<std::string>> docs;
  std::vector<NormalizedValue> values;
};

RandomCorpus MakeRandomCorpus(std::mt19937_64 &rng, size_t n) {
  static const std::vector<std::string> vocab = {
      "revenue", "profit", "acme", "borealis", "2019", "2020", "share", "county",
      "exports", "staff", "delta", "net", "total", "north", "south"};
  static const std::vector<std::string> surfaces = {
      "5 million yuan", "5.0 million yuan", "3.2 million", "12.5%", "12.50%",
      "2,400 employees", "2.4 thousand", "7", "0.7"};
  TermTokenizer tokenizer;
  QuantityExtractor extractor;
  RandomCorpus c;
  for (size_t r = 0; r < n; ++r) {
    size_t len = 1 + rng() % 5;
    std::string text;
    for (size_t w = 0; w < len; ++w) {
      text += (w ? " " : "") + vocab[rng() % vocab.size()];
    }
    QuantityRecord rec =
        MakeRecord("r" + std::to_string(r), text, surfaces[rng() % surfaces.size()]);
    c.docs.push_back(tokenizer.Tokenize(rec.description_text));
    c.values.push_back(extractor.Normalize(rec.surface));
    c.records.push_back(std::move(rec));
  }
  return c;
}

TEST(MinePairsTest, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    RandomCorpus c = MakeRandomCorpus(rng, 2 + rng() % 80);
    size_t k = 1 + rng() % 8;
    MiningResult result = MinePairs(c.records, IndexOf(c.records), {.k = k});
    auto want = oracle::ExhaustiveMine(c.docs, c.values, k, 1.2, 0.75);
    std::map<std::pair<size_t, size_t>, MinedPair> got;
    for (const auto *list : {&result.paraphrase, &result.confusing}) {
      for (const MinedPair &p : *list) got[{p.i, p.j}] = p;
    }
    ASSERT_EQ(got.size(), want.size()) << "trial " << trial;
    for (const auto &[key, oracle_pair] : want) {
      auto it = got.find(key);
      ASSERT_NE(it, got.end());
      EXPECT_LT(it->second.i, it->second.j);
      EXPECT_EQ(it->second.paraphrase, oracle_pair.paraphrase);
      EXPECT_NEAR(it->second.score, oracle_pair.score, 1e-9);
    }
  }
}

TEST(MinePairsTest, ReportInvariantsAndLabelConsistency) {
  std::mt19937_64 rng(13);
  RandomCorpus c = MakeRandomCorpus(rng, 120);
  MiningResult result = MinePairs(c.records, IndexOf(c.records), {.k = 5});
  const MiningReport &r = result.report;
  EXPECT_EQ(r.queries, c.records.size());
  EXPECT_EQ(r.paraphrase + r.confusing, r.candidate_pairs);
  EXPECT_LE(r.candidate_pairs, r.raw_candidates);
  EXPECT_LE(r.raw_candidates, 5 * c.records.size());
  for (const MinedPair &p : result.paraphrase) {
    EXPECT_TRUE(SameValue(c.values[p.i], c.values[p.j]));
  }
  for (const MinedPair &p : result.confusing) {
    EXPECT_FALSE(SameValue(c.values[p.i], c.values[p.j]));
  }
  EXPECT_NE(r.ToJson().find("\"candidate_pairs\""), std::string::npos);
}

TEST(MinePairsTest, MinimumScoreAndQueryFilter) {
  std::mt19937_64 rng(29);
  RandomCorpus c = MakeRandomCorpus(rng, 60);
  InvertedIndex index = IndexOf(c.records);
  MiningResult all = MinePairs(c.records, index, {.k = 5});
  MiningResult strict = MinePairs(c.records, index, {.k = 5, .min_score = 2.0});
  EXPECT_LE(strict.report.candidate_pairs, all.report.candidate_pairs);
  for (const auto *list : {&strict.paraphrase, &strict.confusing}) {
    for (const MinedPair &p : *list) EXPECT_GE(p.score, 2.0);
  }

  QueryFilter filter{.enabled = true, .min_segments = 1, .min_sig_digits = 2};
  MiningResult filtered = MinePairs(c.records, index, {.k = 5, .filter = filter});
  size_t accepted = 0;
  for (const QuantityRecord &r : c.records) accepted += filter.Accepts(r);
  EXPECT_EQ(filtered.report.queries, accepted);
  EXPECT_LT(accepted, c.records.size());

  QuantityRecord two = MakeRecord("t", "Acme revenue", "12.5%");
  two.segments = {{0, 1}, {1, 2}};
  EXPECT_TRUE((QueryFilter{.enabled = true}).Accepts(two));
  EXPECT_FALSE((QueryFilter{.enabled = true}).Accepts(MakeRecord("u", "Acme", "12.5%")));
  EXPECT_TRUE(QueryFilter{}.Accepts(MakeRecord("u", "Acme", "7")));
}

TEST(PairsIoTest, RoundTripAndErrors) {
  std::mt19937_64 rng(2);
  RandomCorpus c = MakeRandomCorpus(rng, 40);
  MiningResult result = MinePairs(c.records, IndexOf(c.records), {.k = 4});
  testing::TempDir dir;
  std::string path = dir.file("pairs.jsonl");
  SavePairs(path, c.records, result);
  MiningResult loaded = LoadPairs(path, c.records);
  EXPECT_EQ(loaded.paraphrase, result.paraphrase);
  EXPECT_EQ(loaded.confusing, result.confusing);
  EXPECT_EQ(loaded.report.candidate_pairs, result.report.candidate_pairs);

  std::vector<QuantityRecord> other = {MakeRecord("zz", "unrelated", "1")};
  try {
    LoadPairs(path, other);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
    EXPECT_EQ(e.line(), 1);
  }
  testing::WriteAll(path, "{\"i\":\"r0\",\"j\":\"r1\",\"label\":\"maybe\",\"score\":1,"
                          "\"query\":\"r0\"}\n");
  EXPECT_THROW(LoadPairs(path, c.records), Error);
}

TEST(EstimatorTest, ClosedFormExamples) {
  EXPECT_NEAR(EstimateSameFactProbability(1e6, 1e4, 2, 3, 1), 1.0 / (1.0 + 1e-5), 1e-12);
  double tiny = EstimateSameFactProbability(1e12, 10, 1, 1, 1);
  EXPECT_NEAR(tiny, 1e-10, 1e-12);
  EXPECT_NEAR(EstimateSameFactProbability(1e6, 1e4, 2, 3, 1e300), 1.0, 1e-15);
  EXPECT_EQ(EstimateSameFactProbability(1e300, 1.0000001, 1, 1e-300, 1e-300), 0.0);
}

TEST(EstimatorTest, Monotonicity) {
  const double base[5] = {1e8, 50, 2, 3, 2};
  for (int arg = 0; arg < 5; ++arg) {
    double prev = -1;
    for (double scale : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      double a[5];
      for (int i = 0; i < 5; ++i) a[i] = base[i];
      a[arg] *= scale;
      double p = EstimateSameFactProbability(a[0], a[1], a[2], a[3], a[4]);
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      if (prev >= 0) {
        // Decreasing in the record count, increasing in everything else.
        if (arg == 0) {
          EXPECT_LT(p, prev);
        } else {
          EXPECT_GT(p, prev);
        }
      }
      prev = p;
    }
  }
}

TEST(EstimatorTest, DomainErrors) {
  const double inf = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double bad : {0.0, -1.0, inf, nan}) {
    for (int arg = 0; arg < 5; ++arg) {
      double a[5] = {1e6, 1e4, 2, 3, 1};
      a[arg] = bad;
      try {
        EstimateSameFactProbability(a[0], a[1], a[2], a[3], a[4]);
        ADD_FAILURE() << "arg " << arg;
      } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::kDomainError);
      }
    }
  }
}

TEST(SplitTest, SingleDocumentGoesToTrain) {
  std::vector<QuantityRecord> records = {MakeRecord("a", "x", "1", "doc"),
                                         MakeRecord("b", "y", "2", "doc")};
  DocumentSplit split = SplitByDocument(records, 0.7, 1);
  EXPECT_EQ(split.train_docs, std::vector<std::string>{"doc"});
  EXPECT_TRUE(split.test_docs.empty());
  EXPECT_EQ(split.train, (std::vector<size_t>{0, 1}));
}

TEST(SplitTest, TenDocumentsSevenTrain) {
  std::vector<std::string> ids;
  for (int d = 0; d < 10; ++d) ids.push_back("d" + std::to_string(d));
  for (uint64_t seed : {1u, 2u, 3u}) {
    DocumentSplit split = SplitDocumentIds(ids, 0.7, seed);
    EXPECT_EQ(split.train_docs.size(), 7u);
    EXPECT_EQ(split.test_docs.size(), 3u);
    EXPECT_TRUE(std::is_sorted(split.train_docs.begin(), split.train_docs.end()));
  }
  EXPECT_EQ(SplitDocumentIds(ids, 0.7, 5).train_docs,
            SplitDocumentIds(ids, 0.7, 5).train_docs);
  EXPECT_EQ(SplitDocumentIds(ids, 0.25, 5).train_docs.size(), 3u);  // 2.5 rounds up
  EXPECT_THROW(SplitDocumentIds(ids, 1.0, 5), Error);
  EXPECT_THROW(SplitDocumentIds(ids, 0.0, 5), Error);
}

TEST(SplitTest, RecordsPartitionByDocument) {
  std::vector<QuantityRecord> records;
  for (int r = 0; r < 50; ++r) {
    records.push_back(MakeRecord("r" + std::to_string(r), "x", "1",
                                 "doc" + std::to_string(r % 13)));
  }
  DocumentSplit split = SplitByDocument(records, 0.7, 9);
  EXPECT_EQ(split.train.size() + split.test.size(), records.size());
  std::set<std::string> train_docs, test_docs;
  for (size_t r : split.train) train_docs.insert(records[r].doc_id);
  for (size_t r : split.test) test_docs.insert(records[r].doc_id);
  for (const std::string &d : train_docs) EXPECT_EQ(test_docs.count(d), 0u);
  EXPECT_EQ(train_docs.size(), 9u);
  EXPECT_TRUE(std::is_sorted(split.train.begin(), split.train.end()));
}

}  // namespace
}  // namespace quantret
