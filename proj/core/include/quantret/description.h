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

#ifndef QUANTRET_DESCRIPTION_H_
#define QUANTRET_DESCRIPTION_H_

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quantret/quantity.h"
#include "quantret/text.h"

namespace quantret {

inline constexpr std::string_view kStartMarker = "[START]";
inline constexpr std::string_view kEndMarker = "[END]";

enum class Tag : uint8_t { kB = 0, kI = 1, kE = 2, kO = 3 };
inline constexpr int kNumTags = 4;

using TagSequence = std::vector<Tag>;

char TagChar(Tag tag);
std::string TagsToString(const TagSequence &tags);
// Parses "BIEO" letters; whitespace is ignored.
TagSequence ParseTags(std::string_view letters);

// Half-open token range over the marker-free sentence.
struct Segment {
  size_t begin = 0;
  size_t end = 0;

  size_t length() const { return end - begin; }
  auto operator<=>(const Segment &other) const = default;
};

// Ordered, pairwise disjoint segments. May be empty for quantities that do
// not state a fact.
struct Description {
  std::vector<Segment> segments;
  std::string text;

  bool empty() const { return segments.empty(); }
  bool operator==(const Description &other) const {
    return segments == other.segments;
  }
};

// Segment tokens joined with spaces, segments in order.
std::string RenderDescription(std::span<const Token> tokens,
                              std::span<const Segment> segments);
Description MakeDescription(std::span<const Token> tokens,
                            std::vector<Segment> segments);

// A sentence with [START] and [END] inserted around one pivot quantity.
struct PivotSentence {
  std::vector<Token> tokens;
  size_t pivot_begin = 0;  // original (marker-free) indices
  size_t pivot_end = 0;

  size_t start_marker() const { return pivot_begin; }
  size_t end_marker() const { return pivot_end + 1; }
  size_t original_length() const { return tokens.size() - 2; }

  bool IsMarker(size_t pos) const {
    return pos == start_marker() || pos == end_marker();
  }
  bool IsPivot(size_t pos) const {
    return pos > start_marker() && pos < end_marker();
  }
  // Marker-free index of position `pos`, or -1 for a marker.
  long OriginalIndex(size_t pos) const;
  size_t PositionOf(size_t original_index) const;
};

// Throws Error(kSpanOutOfBounds) unless begin < end <= tokens.size().
PivotSentence MarkPivot(std::span<const Token> tokens, size_t begin,
                        size_t end);
PivotSentence MarkPivot(std::span<const Token> tokens,
                        const RawQuantity &pivot);
std::vector<Token> StripMarkers(const PivotSentence &sentence);

// Legal sequences are built from O, lone B, and B I* E. Throws
// Error(kIllegalTagTransition) naming the first offending position.
void ValidateTags(const TagSequence &tags);
bool IsLegalTagSequence(const TagSequence &tags);

// Decodes tags over the pivot sentence. Marker and pivot positions are
// treated as O: a segment touching them is clipped to the remaining tokens.
Description DecodeTags(const TagSequence &tags, const PivotSentence &sentence);

// Tags over a marker-free sentence of `length` tokens.
TagSequence EncodeSegments(const Description &description, size_t length);
// Tags over the pivot sentence (markers and pivot tagged O).
TagSequence EncodeForPivot(const Description &description,
                           const PivotSentence &sentence);

// Forces illegal tags, markers and pivot tokens to O, so any tagger output
// decodes to a usable description.
TagSequence RepairTags(TagSequence tags, const PivotSentence &sentence);

struct LabeledExample {
  std::vector<Token> tokens;
  RawQuantity pivot;
  Description gold;
};

// Line-delimited JSON: {"tokens": [...], "pivot": [a, b],
// "segments": [[a, b], ...]}.
std::vector<LabeledExample> LoadLabeledExamples(const std::string &path);
LabeledExample ParseLabeledExample(std::string_view json_line,
                                   const std::string &source = "<string>",
                                   int line = 0);
void SaveLabeledExamples(const std::string &path,
                         std::span<const LabeledExample> examples);
std::string LabeledExampleToJson(const LabeledExample &example);

// Segment metrics.

enum class MatchMode { kStrict, kPartial };

// |a ∩ b| > |a ∪ b| / 3, in tokens.
bool PartialMatch(const Segment &a, const Segment &b);

struct PrfScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  size_t predicted = 0;
  size_t gold = 0;
  size_t correct_predicted = 0;  // predicted segments judged correct
  size_t correct_gold = 0;       // gold segments recovered
};

// Micro-averaged over all (sentence, quantity) pairs. With no predicted
// and no gold segments anywhere, all scores are 1.
PrfScores SegmentPrf(std::span<const Description> predicted,
                     std::span<const Description> gold, MatchMode mode);

// Fraction of pairs whose segment sets match exactly (strict) or admit a
// one-to-one partial matching (partial). 0 for an empty dataset.
double QuantityAccuracy(std::span<const Description> predicted,
                        std::span<const Description> gold, MatchMode mode);
bool DescriptionsMatch(const Description &predicted, const Description &gold,
                       MatchMode mode);

}  // namespace quantret

#endif  // QUANTRET_DESCRIPTION_H_
