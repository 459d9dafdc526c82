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

#include "quantret/description.h"

#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles/oracles.h"
#include "quantret/error.h"
#include "test_util.h"

namespace quantret {
namespace {

// Whitespace split, so test sentences spell out their exact tokens.
std::vector<Token> Tokens(const std::string &sentence) {
  std::istringstream in(sentence);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return MakeTokens(words);
}

Description Desc(std::vector<Segment> segments) {
  Description d;
  d.segments = std::move(segments);
  return d;
}

TEST(MarkPivotTest, InsertsMarkersAroundPivot) {
  std::vector<Token> tokens =
      Tokens("income was 47,412 yuan and 18,931 yuan respectively .");
  PivotSentence ps = MarkPivot(tokens, 5, 7);
  EXPECT_EQ(JoinTokens(ps.tokens),
            "income was 47,412 yuan and [START] 18,931 yuan [END] respectively .");
  EXPECT_EQ(ps.start_marker(), 5u);
  EXPECT_EQ(ps.end_marker(), 8u);
  EXPECT_TRUE(ps.IsPivot(6));
  EXPECT_FALSE(ps.IsPivot(8));
  EXPECT_EQ(ps.OriginalIndex(9), 7);
  EXPECT_EQ(ps.OriginalIndex(5), -1);
  EXPECT_EQ(ps.PositionOf(7), 9u);
  for (size_t i = 0; i < ps.tokens.size(); ++i) EXPECT_EQ(ps.tokens[i].index, i);
}

TEST(MarkPivotTest, WholeSentencePivot) {
  std::vector<Token> tokens = Tokens("5 million yuan");
  PivotSentence ps = MarkPivot(tokens, 0, 3);
  EXPECT_EQ(ps.tokens.front().text, kStartMarker);
  EXPECT_EQ(ps.tokens.back().text, kEndMarker);
  EXPECT_EQ(ps.original_length(), 3u);
}

TEST(MarkPivotTest, StripMarkersRoundTrip) {
  std::vector<Token> tokens = Tokens("In 2020 , revenue rose 12% to 3.4 million yuan .");
  for (size_t b = 0; b < tokens.size(); ++b) {
    for (size_t e = b + 1; e <= tokens.size(); ++e) {
      EXPECT_EQ(StripMarkers(MarkPivot(tokens, b, e)), tokens);
    }
  }
}

TEST(MarkPivotTest, OutOfBounds) {
  std::vector<Token> tokens = Tokens("a b c");
  for (auto [b, e] : {std::pair<size_t, size_t>{2, 2}, {0, 4}, {3, 5}}) {
    try {
      MarkPivot(tokens, b, e);
      ADD_FAILURE();
    } catch (const Error &err) {
      EXPECT_EQ(err.code(), ErrorCode::kSpanOutOfBounds);
    }
  }
}

TEST(DecodeTagsTest, FourSegmentDescription) {
  std::vector<Token> tokens = Tokens(
      "In 2021 , the average monthly wage of Canada 's northern towns reached "
      "4,310 dollars .");
  PivotSentence ps = MarkPivot(tokens, 13, 15);
  // In 2021 , the average monthly wage of Canada 's northern towns reached
  // [START] 4,310 dollars [END] .
  TagSequence tags = ParseTags("OBOBIIEOBOBEOOOOOO");
  ASSERT_EQ(tags.size(), ps.tokens.size());
  Description d = DecodeTags(tags, ps);
  ASSERT_EQ(d.segments.size(), 4u);
  EXPECT_EQ(RenderDescription(tokens, std::vector<Segment>{d.segments[0]}), "2021");
  EXPECT_EQ(RenderDescription(tokens, std::vector<Segment>{d.segments[1]}),
            "the average monthly wage");
  EXPECT_EQ(RenderDescription(tokens, std::vector<Segment>{d.segments[2]}), "Canada");
  EXPECT_EQ(RenderDescription(tokens, std::vector<Segment>{d.segments[3]}),
            "northern towns");
  EXPECT_EQ(d.text, "2021 the average monthly wage Canada northern towns");
}

TEST(DecodeTagsTest, AllOutsideIsEmpty) {
  std::vector<Token> tokens = Tokens("See Note 7 .");
  PivotSentence ps = MarkPivot(tokens, 2, 3);
  EXPECT_TRUE(DecodeTags(TagSequence(ps.tokens.size(), Tag::kO), ps).empty());
}

TEST(DecodeTagsTest, ClipsAroundMarkersAndPivot) {
  std::vector<Token> tokens = Tokens("a b 5 c");
  PivotSentence ps = MarkPivot(tokens, 2, 3);  // a b [START] 5 [END] c
  Description d = DecodeTags(ParseTags("BIIIIE"), ps);
  EXPECT_EQ(d.segments, (std::vector<Segment>{{0, 2}, {3, 4}}));
}

TEST(DecodeTagsTest, RejectsIllegalSequences) {
  std::vector<Token> tokens = Tokens("a b c d");
  PivotSentence ps = MarkPivot(tokens, 3, 4);
  for (const char *bad : {"IOOOOO", "EOOOOO", "BIOOOO", "OBIOOO", "BIIIII", "OOOOBI"}) {
    try {
      DecodeTags(ParseTags(bad), ps);
      ADD_FAILURE() << bad;
    } catch (const Error &e) {
      EXPECT_EQ(e.code(), ErrorCode::kIllegalTagTransition) << bad;
    }
  }
  EXPECT_THROW(DecodeTags(ParseTags("OOO"), ps), Error);
}

TEST(EncodeSegmentsTest, Examples) {
  EXPECT_EQ(TagsToString(EncodeSegments(Desc({}), 5)), "OOOOO");
  EXPECT_EQ(TagsToString(EncodeSegments(Desc({{1, 2}}), 5)), "OBOOO");
  EXPECT_EQ(TagsToString(EncodeSegments(Desc({{1, 4}}), 5)), "OBIEO");
  EXPECT_EQ(TagsToString(EncodeSegments(Desc({{0, 1}, {1, 3}}), 3)), "BBE");
  try {
    EncodeSegments(Desc({{3, 6}}), 5);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kSpanOutOfBounds);
  }
}

TEST(EncodeSegmentsTest, PivotEncodingSkipsMarkers) {
  std::vector<Token> tokens = Tokens("In 2020 revenue was 5 yuan");
  PivotSentence ps = MarkPivot(tokens, 4, 6);
  TagSequence tags = EncodeForPivot(Desc({{1, 2}, {2, 3}}), ps);
  EXPECT_EQ(TagsToString(tags), "OBBOOOOO");
  EXPECT_EQ(DecodeTags(tags, ps).segments, (std::vector<Segment>{{1, 2}, {2, 3}}));
}

TEST(RepairTagsTest, ForcesIllegalPositionsOutside) {
  std::vector<Token> tokens = Tokens("a b 5 c d");
  PivotSentence ps = MarkPivot(tokens, 2, 3);
  TagSequence repaired = RepairTags(ParseTags("IEBIEBI"), ps);
  EXPECT_TRUE(IsLegalTagSequence(repaired));
  for (size_t p = 2; p <= 4; ++p) EXPECT_EQ(repaired[p], Tag::kO);
}

// A regular-expression recognizer for the tag grammar, written separately
// from the state machine under test.
bool GrammarOracle(const std::string &letters) {
  static const std::regex grammar("(O|B(I*E)?)*");
  return std::regex_match(letters, grammar);
}

TEST(TagGrammarTest, ExhaustiveShortSequences) {
  const char letters[] = {'B', 'I', 'E', 'O'};
  for (size_t length = 0; length <= 7; ++length) {
    size_t total = 1;
    for (size_t i = 0; i < length; ++i) total *= 4;
    for (size_t code = 0; code < total; ++code) {
      std::string s;
      for (size_t i = 0, c = code; i < length; ++i, c /= 4) s += letters[c % 4];
      EXPECT_EQ(IsLegalTagSequence(ParseTags(s)), GrammarOracle(s)) << s;
    }
  }
}

TEST(TagGrammarTest, EncodeDecodeRoundTrip) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    size_t length = 1 + rng() % 20;
    TagSequence tags = oracle::RandomValidTags(rng, length);
    ASSERT_TRUE(IsLegalTagSequence(tags));
    std::vector<Token> tokens = MakeTokens(std::vector<std::string>(length, "w"));
    // Decode over a plain sentence: a pivot appended after the tagged span.
    std::vector<Token> with_pivot = tokens;
    with_pivot.push_back({"5", length});
    PivotSentence ps = MarkPivot(with_pivot, length, length + 1);
    TagSequence padded = tags;
    padded.insert(padded.end(), {Tag::kO, Tag::kO, Tag::kO});
    Description d = DecodeTags(padded, ps);
    EXPECT_EQ(EncodeSegments(d, length), tags) << TagsToString(tags);
  }
}

TEST(PartialMatchTest, Examples) {
  EXPECT_TRUE(PartialMatch({4, 8}, {3, 7}));
  EXPECT_FALSE(PartialMatch({0, 2}, {2, 4}));
  EXPECT_TRUE(PartialMatch({1, 3}, {1, 3}));
  EXPECT_FALSE(PartialMatch({0, 1}, {0, 3}));  // 1 > 3/3 fails
  EXPECT_TRUE(PartialMatch({0, 2}, {0, 5}));   // 2 > 5/3
}

TEST(PartialMatchTest, SymmetricAndImpliedByEquality) {
  for (size_t a = 0; a < 8; ++a) {
    for (size_t b = a + 1; b <= 8; ++b) {
      for (size_t c = 0; c < 8; ++c) {
        for (size_t d = c + 1; d <= 8; ++d) {
          EXPECT_EQ(PartialMatch({a, b}, {c, d}), PartialMatch({c, d}, {a, b}));
        }
      }
      EXPECT_TRUE(PartialMatch({a, b}, {a, b}));
    }
  }
}

TEST(SegmentPrfTest, Examples) {
  Segment a{0, 2}, b{3, 4}, c{6, 8};
  PrfScores half = SegmentPrf(std::vector{Desc({a})}, std::vector{Desc({a, b})},
                              MatchMode::kStrict);
  EXPECT_DOUBLE_EQ(half.precision, 1.0);
  EXPECT_DOUBLE_EQ(half.recall, 0.5);
  EXPECT_DOUBLE_EQ(half.f1, 2.0 / 3.0);

  PrfScores same = SegmentPrf(std::vector{Desc({a, b})}, std::vector{Desc({a, b})},
                              MatchMode::kStrict);
  EXPECT_DOUBLE_EQ(same.f1, 1.0);

  PrfScores none = SegmentPrf(std::vector{Desc({c})}, std::vector{Desc({a})},
                              MatchMode::kPartial);
  EXPECT_DOUBLE_EQ(none.precision, 0.0);
  EXPECT_DOUBLE_EQ(none.recall, 0.0);
  EXPECT_DOUBLE_EQ(none.f1, 0.0);
}

TEST(SegmentPrfTest, EmptyPairsContributeNothing) {
  Segment a{0, 2};
  std::vector<Description> pred = {Desc({}), Desc({a})};
  std::vector<Description> gold = {Desc({}), Desc({a})};
  EXPECT_DOUBLE_EQ(SegmentPrf(pred, gold, MatchMode::kStrict).f1, 1.0);
  std::vector<Description> empty = {Desc({})};
  EXPECT_DOUBLE_EQ(SegmentPrf(empty, empty, MatchMode::kStrict).f1, 1.0);
  EXPECT_THROW(SegmentPrf(pred, empty, MatchMode::kStrict), Error);
}

TEST(QuantityAccuracyTest, Examples) {
  Segment a{0, 2}, b{3, 5};
  std::vector<Description> pred = {Desc({a}), Desc({b}), Desc({a, b}), Desc({})};
  std::vector<Description> gold = {Desc({a}), Desc({a}), Desc({a, b}), Desc({b})};
  EXPECT_DOUBLE_EQ(QuantityAccuracy(pred, gold, MatchMode::kStrict), 0.5);
  EXPECT_DOUBLE_EQ(QuantityAccuracy(gold, gold, MatchMode::kStrict), 1.0);
  // Partial matching must be one-to-one: two predictions cannot share a gold.
  std::vector<Description> p2 = {Desc({{0, 3}, {1, 4}})};
  std::vector<Description> g2 = {Desc({{0, 4}, {8, 9}})};
  EXPECT_DOUBLE_EQ(QuantityAccuracy(p2, g2, MatchMode::kPartial), 0.0);
}

TEST(MetricsPropertyTest, MatchNaiveOracleAndStrictBelowPartial) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Description> pred, gold;
    size_t pairs = 1 + rng() % 8;
    for (size_t i = 0; i < pairs; ++i) {
      size_t length = 1 + rng() % 20;
      pred.push_back(Desc(oracle::RandomSegments(rng, length, 4)));
      gold.push_back(rng() % 4 == 0 ? pred.back()
                                    : Desc(oracle::RandomSegments(rng, length, 4)));
    }
    for (bool partial : {false, true}) {
      MatchMode mode = partial ? MatchMode::kPartial : MatchMode::kStrict;
      PrfScores got = SegmentPrf(pred, gold, mode);
      oracle::NaivePrf want = oracle::NaiveSegmentPrf(pred, gold, partial);
      EXPECT_NEAR(got.precision, want.precision, 1e-12);
      EXPECT_NEAR(got.recall, want.recall, 1e-12);
      EXPECT_NEAR(got.f1, want.f1, 1e-12);
      EXPECT_NEAR(QuantityAccuracy(pred, gold, mode),
                  oracle::NaiveQuantityAccuracy(pred, gold, partial), 1e-12);
    }
    EXPECT_LE(SegmentPrf(pred, gold, MatchMode::kStrict).f1,
              SegmentPrf(pred, gold, MatchMode::kPartial).f1 + 1e-15);
    EXPECT_LE(QuantityAccuracy(pred, gold, MatchMode::kStrict),
              QuantityAccuracy(pred, gold, MatchMode::kPartial));
  }
}

TEST(LabeledExampleTest, JsonRoundTripAndErrors) {
  LabeledExample ex = ParseLabeledExample(
      R"({"tokens": ["In", "2020", ",", "revenue", "was", "5", "yuan"],)"
      R"( "pivot": [5, 7], "segments": [[1, 2], [3, 4]]})");
  EXPECT_EQ(ex.pivot.surface, "5 yuan");
  EXPECT_EQ(ex.gold.text, "2020 revenue");
  LabeledExample back = ParseLabeledExample(LabeledExampleToJson(ex));
  EXPECT_EQ(back.tokens, ex.tokens);
  EXPECT_EQ(back.gold, ex.gold);

  testing::TempDir dir;
  std::string path = dir.file("bad.jsonl");
  testing::WriteAll(path, LabeledExampleToJson(ex) + "\n{\"tokens\": 3}\n");
  try {
    LoadLabeledExamples(path);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.file(), path);
  }
  // Segments overlapping the pivot violate the description invariant.
  EXPECT_THROW(ParseLabeledExample(
                   R"({"tokens": ["a", "5", "b"], "pivot": [1, 2], "segments": [[0, 2]]})"),
               Error);
}

TEST(LabeledExampleTest, SaveLoadFixture) {
  std::vector<LabeledExample> examples =
      LoadLabeledExamples(testing::FixturePath("parser_train.jsonl"));
  ASSERT_EQ(examples.size(), 50u);
  testing::TempDir dir;
  SaveLabeledExamples(dir.file("copy.jsonl"), examples);
  std::vector<LabeledExample> again = LoadLabeledExamples(dir.file("copy.jsonl"));
  ASSERT_EQ(again.size(), examples.size());
  for (size_t i = 0; i < again.size(); ++i) {
    EXPECT_EQ(again[i].tokens, examples[i].tokens);
    EXPECT_EQ(again[i].pivot, examples[i].pivot);
    EXPECT_EQ(again[i].gold, examples[i].gold);
  }
}

}  // namespace
}  // namespace quantret
