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

#include <algorithm>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>

#include "quantret/error.h"

namespace quantret {
namespace {

using json = nlohmann::json;

// Grammar state after consuming a tag.
enum class State { kOutside, kOpenB, kOpenI };

Error IllegalAt(size_t pos, const std::string &why) {
  return Error(ErrorCode::kIllegalTagTransition,
               "illegal tag at position " + std::to_string(pos) + ": " + why);
}

void CheckSegments(const std::vector<Segment> &segments, size_t length) {
  size_t last_end = 0;
  for (size_t i = 0; i < segments.size(); ++i) {
    const Segment &s = segments[i];
    if (s.begin >= s.end || s.end > length) {
      throw Error(ErrorCode::kSpanOutOfBounds,
                  "segment [" + std::to_string(s.begin) + "," +
                      std::to_string(s.end) + ") outside sentence of length " +
                      std::to_string(length));
    }
    if (i > 0 && s.begin < last_end) {
      throw Error(ErrorCode::kInvalidArgument,
                  "segments must be sorted and disjoint");
    }
    last_end = s.end;
  }
}

}  // namespace

char TagChar(Tag tag) {
  switch (tag) {
    case Tag::kB: return 'B';
    case Tag::kI: return 'I';
    case Tag::kE: return 'E';
    case Tag::kO: return 'O';
  }
  return '?';
}

std::string TagsToString(const TagSequence &tags) {
  std::string out;
  out.reserve(tags.size());
  for (Tag t : tags) out += TagChar(t);
  return out;
}

TagSequence ParseTags(std::string_view letters) {
  TagSequence tags;
  for (char c : letters) {
    switch (c) {
      case 'B': tags.push_back(Tag::kB); break;
      case 'I': tags.push_back(Tag::kI); break;
      case 'E': tags.push_back(Tag::kE); break;
      case 'O': tags.push_back(Tag::kO); break;
      case ' ': case '\t': break;
      default:
        throw Error(ErrorCode::kParseError,
                    std::string("unknown tag letter '") + c + "'");
    }
  }
  return tags;
}

std::string RenderDescription(std::span<const Token> tokens,
                              std::span<const Segment> segments) {
  std::string out;
  for (const Segment &s : segments) {
    if (!out.empty()) out += ' ';
    out += JoinTokens(tokens, s.begin, s.end);
  }
  return out;
}

Description MakeDescription(std::span<const Token> tokens,
                            std::vector<Segment> segments) {
  Description d;
  d.segments = std::move(segments);
  d.text = RenderDescription(tokens, d.segments);
  return d;
}

long PivotSentence::OriginalIndex(size_t pos) const {
  if (IsMarker(pos)) return -1;
  if (pos < start_marker()) return static_cast<long>(pos);
  if (pos < end_marker()) return static_cast<long>(pos) - 1;
  return static_cast<long>(pos) - 2;
}

size_t PivotSentence::PositionOf(size_t original_index) const {
  if (original_index < pivot_begin) return original_index;
  if (original_index < pivot_end) return original_index + 1;
  return original_index + 2;
}

PivotSentence MarkPivot(std::span<const Token> tokens, size_t begin,
                        size_t end) {
  if (begin >= end || end > tokens.size()) {
    throw Error(ErrorCode::kSpanOutOfBounds,
                "pivot [" + std::to_string(begin) + "," + std::to_string(end) +
                    ") outside sentence of length " +
                    std::to_string(tokens.size()));
  }
  PivotSentence ps;
  ps.pivot_begin = begin;
  ps.pivot_end = end;
  ps.tokens.reserve(tokens.size() + 2);
  const auto push = [&](std::string_view text) {
    ps.tokens.push_back({std::string(text), ps.tokens.size()});
  };
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i == begin) push(kStartMarker);
    push(tokens[i].text);
    if (i + 1 == end) push(kEndMarker);
  }
  return ps;
}

PivotSentence MarkPivot(std::span<const Token> tokens,
                        const RawQuantity &pivot) {
  return MarkPivot(tokens, pivot.begin, pivot.end);
}

std::vector<Token> StripMarkers(const PivotSentence &sentence) {
  std::vector<Token> out;
  out.reserve(sentence.original_length());
  for (size_t pos = 0; pos < sentence.tokens.size(); ++pos) {
    if (sentence.IsMarker(pos)) continue;
    out.push_back({sentence.tokens[pos].text, out.size()});
  }
  return out;
}

void ValidateTags(const TagSequence &tags) {
  State state = State::kOutside;
  for (size_t i = 0; i < tags.size(); ++i) {
    switch (tags[i]) {
      case Tag::kB:
        if (state == State::kOpenI) throw IllegalAt(i, "I must end with E");
        state = State::kOpenB;
        break;
      case Tag::kI:
        if (state == State::kOutside) throw IllegalAt(i, "I without B");
        state = State::kOpenI;
        break;
      case Tag::kE:
        if (state == State::kOutside) throw IllegalAt(i, "E without B");
        state = State::kOutside;
        break;
      case Tag::kO:
        if (state == State::kOpenI) throw IllegalAt(i, "I must end with E");
        state = State::kOutside;
        break;
    }
  }
  if (state == State::kOpenI) {
    throw IllegalAt(tags.size(), "sequence ends inside a segment");
  }
}

bool IsLegalTagSequence(const TagSequence &tags) {
  try {
    ValidateTags(tags);
    return true;
  } catch (const Error &) {
    return false;
  }
}

Description DecodeTags(const TagSequence &tags,
                       const PivotSentence &sentence) {
  if (tags.size() != sentence.tokens.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "tag sequence length " + std::to_string(tags.size()) +
                    " does not match sentence length " +
                    std::to_string(sentence.tokens.size()));
  }
  ValidateTags(tags);

  std::vector<Segment> segments;
  const auto emit = [&](size_t from, size_t to) {
    // Split [from, to) around marker and pivot positions.
    size_t run = from;
    for (size_t p = from; p <= to; ++p) {
      bool blocked = p == to || sentence.IsMarker(p) || sentence.IsPivot(p);
      if (!blocked) continue;
      if (run < p) {
        auto b = static_cast<size_t>(sentence.OriginalIndex(run));
        auto e = static_cast<size_t>(sentence.OriginalIndex(p - 1)) + 1;
        segments.push_back({b, e});
      }
      run = p + 1;
    }
  };
  size_t open = 0;
  bool in_segment = false;
  for (size_t i = 0; i < tags.size(); ++i) {
    Tag t = tags[i];
    if (t == Tag::kB) {
      if (in_segment) emit(open, i);
      open = i;
      in_segment = true;
    } else if (t == Tag::kE) {
      emit(open, i + 1);
      in_segment = false;
    } else if (t == Tag::kO) {
      if (in_segment) emit(open, i);
      in_segment = false;
    }
  }
  if (in_segment) emit(open, tags.size());

  std::vector<Token> plain = StripMarkers(sentence);
  return MakeDescription(plain, std::move(segments));
}

TagSequence EncodeSegments(const Description &description, size_t length) {
  CheckSegments(description.segments, length);
  TagSequence tags(length, Tag::kO);
  for (const Segment &s : description.segments) {
    tags[s.begin] = Tag::kB;
    if (s.length() == 1) continue;
    for (size_t i = s.begin + 1; i + 1 < s.end; ++i) tags[i] = Tag::kI;
    tags[s.end - 1] = Tag::kE;
  }
  return tags;
}

TagSequence EncodeForPivot(const Description &description,
                           const PivotSentence &sentence) {
  CheckSegments(description.segments, sentence.original_length());
  TagSequence plain =
      EncodeSegments(description, sentence.original_length());
  TagSequence tags(sentence.tokens.size(), Tag::kO);
  for (size_t i = 0; i < plain.size(); ++i) {
    if (plain[i] == Tag::kO) continue;
    if (i >= sentence.pivot_begin && i < sentence.pivot_end) {
      throw Error(ErrorCode::kSpanOutOfBounds,
                  "description segment overlaps the pivot quantity");
    }
    tags[sentence.PositionOf(i)] = plain[i];
  }
  return tags;
}

TagSequence RepairTags(TagSequence tags, const PivotSentence &sentence) {
  tags.resize(sentence.tokens.size(), Tag::kO);
  State state = State::kOutside;
  size_t open = 0;
  const auto drop_inside = [&](size_t upto) {
    for (size_t p = open + 1; p < upto; ++p) tags[p] = Tag::kO;
  };
  for (size_t i = 0; i < tags.size(); ++i) {
    if (sentence.IsMarker(i) || sentence.IsPivot(i)) tags[i] = Tag::kO;
    switch (tags[i]) {
      case Tag::kB:
        if (state == State::kOpenI) drop_inside(i);
        open = i;
        state = State::kOpenB;
        break;
      case Tag::kI:
        if (state == State::kOutside) {
          tags[i] = Tag::kO;
        } else {
          state = State::kOpenI;
        }
        break;
      case Tag::kE:
        if (state == State::kOutside) tags[i] = Tag::kO;
        state = State::kOutside;
        break;
      case Tag::kO:
        if (state == State::kOpenI) drop_inside(i);
        state = State::kOutside;
        break;
    }
  }
  if (state == State::kOpenI) drop_inside(tags.size());
  return tags;
}

// --- LabeledExample I/O ---------------------------------------------------

LabeledExample ParseLabeledExample(std::string_view json_line,
                                   const std::string &source, int line) {
  const auto fail = [&](const std::string &why) {
    return Error(ErrorCode::kParseError, why, source, line);
  };
  json j;
  try {
    j = json::parse(json_line);
  } catch (const json::exception &e) {
    throw fail(std::string("invalid JSON: ") + e.what());
  }
  LabeledExample ex;
  try {
    std::vector<std::string> words = j.at("tokens").get<std::vector<std::string>>();
    ex.tokens = MakeTokens(words);
    auto pivot = j.at("pivot").get<std::vector<size_t>>();
    if (pivot.size() != 2) throw fail("pivot must be [begin, end]");
    ex.pivot.begin = pivot[0];
    ex.pivot.end = pivot[1];
    std::vector<Segment> segments;
    for (const auto &s : j.at("segments")) {
      auto range = s.get<std::vector<size_t>>();
      if (range.size() != 2) throw fail("segment must be [begin, end]");
      segments.push_back({range[0], range[1]});
    }
    ex.gold.segments = std::move(segments);
  } catch (const json::exception &e) {
    throw fail(std::string("bad field: ") + e.what());
  }
  if (ex.pivot.begin >= ex.pivot.end || ex.pivot.end > ex.tokens.size()) {
    throw fail("pivot out of bounds");
  }
  try {
    CheckSegments(ex.gold.segments, ex.tokens.size());
  } catch (const Error &e) {
    throw fail(e.what());
  }
  for (const Segment &s : ex.gold.segments) {
    if (s.begin < ex.pivot.end && ex.pivot.begin < s.end) {
      throw fail("segment overlaps the pivot quantity");
    }
  }
  ex.pivot.surface = JoinTokens(ex.tokens, ex.pivot.begin, ex.pivot.end);
  ex.gold.text = RenderDescription(ex.tokens, ex.gold.segments);
  return ex;
}

std::vector<LabeledExample> LoadLabeledExamples(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path, path, 0);
  std::vector<LabeledExample> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(ParseLabeledExample(line, path, line_no));
  }
  return out;
}

std::string LabeledExampleToJson(const LabeledExample &example) {
  json j;
  std::vector<std::string> words;
  words.reserve(example.tokens.size());
  for (const Token &t : example.tokens) words.push_back(t.text);
  j["tokens"] = words;
  j["pivot"] = {example.pivot.begin, example.pivot.end};
  json segments = json::array();
  for (const Segment &s : example.gold.segments) {
    segments.push_back({s.begin, s.end});
  }
  j["segments"] = segments;
  return j.dump();
}

void SaveLabeledExamples(const std::string &path,
                         std::span<const LabeledExample> examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path, path, 0);
  for (const LabeledExample &ex : examples) {
    out << LabeledExampleToJson(ex) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, "write failed", path, 0);
}

// --- Metrics --------------------------------------------------------------

bool PartialMatch(const Segment &a, const Segment &b) {
  size_t lo = std::max(a.begin, b.begin);
  size_t hi = std::min(a.end, b.end);
  size_t inter = hi > lo ? hi - lo : 0;
  size_t uni = a.length() + b.length() - inter;
  return 3 * inter > uni;
}

namespace {

bool SegmentMatches(const Segment &s, const std::vector<Segment> &others,
                    MatchMode mode) {
  if (mode == MatchMode::kStrict) {
    return std::binary_search(others.begin(), others.end(), s);
  }
  return std::any_of(others.begin(), others.end(),
                     [&](const Segment &o) { return PartialMatch(s, o); });
}

// Kuhn's augmenting-path bipartite matching.
bool PerfectPartialMatching(const std::vector<Segment> &left,
                            const std::vector<Segment> &right) {
  if (left.size() != right.size()) return false;
  std::vector<long> match_right(right.size(), -1);
  std::function<bool(size_t, std::vector<bool> &)> augment =
      [&](size_t u, std::vector<bool> &seen) {
        for (size_t v = 0; v < right.size(); ++v) {
          if (seen[v] || !PartialMatch(left[u], right[v])) continue;
          seen[v] = true;
          if (match_right[v] < 0 ||
              augment(static_cast<size_t>(match_right[v]), seen)) {
            match_right[v] = static_cast<long>(u);
            return true;
          }
        }
        return false;
      };
  for (size_t u = 0; u < left.size(); ++u) {
    std::vector<bool> seen(right.size(), false);
    if (!augment(u, seen)) return false;
  }
  return true;
}

void CheckAligned(size_t a, size_t b) {
  if (a != b) {
    throw Error(ErrorCode::kInvalidArgument,
                "predicted and gold datasets differ in size");
  }
}

}  // namespace

PrfScores SegmentPrf(std::span<const Description> predicted,
                     std::span<const Description> gold, MatchMode mode) {
  CheckAligned(predicted.size(), gold.size());
  PrfScores s;
  for (size_t i = 0; i < predicted.size(); ++i) {
    std::vector<Segment> p = predicted[i].segments;
    std::vector<Segment> g = gold[i].segments;
    std::sort(p.begin(), p.end());
    std::sort(g.begin(), g.end());
    s.predicted += p.size();
    s.gold += g.size();
    for (const Segment &seg : p) s.correct_predicted += SegmentMatches(seg, g, mode);
    for (const Segment &seg : g) s.correct_gold += SegmentMatches(seg, p, mode);
  }
  const auto ratio = [](size_t num, size_t den, bool other_empty) {
    if (den == 0) return other_empty ? 1.0 : 0.0;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  s.precision = ratio(s.correct_predicted, s.predicted, s.gold == 0);
  s.recall = ratio(s.correct_gold, s.gold, s.predicted == 0);
  double sum = s.precision + s.recall;
  s.f1 = sum > 0 ? 2 * s.precision * s.recall / sum : 0.0;
  return s;
}

bool DescriptionsMatch(const Description &predicted, const Description &gold,
                       MatchMode mode) {
  std::vector<Segment> p = predicted.segments;
  std::vector<Segment> g = gold.segments;
  std::sort(p.begin(), p.end());
  std::sort(g.begin(), g.end());
  if (mode == MatchMode::kStrict) return p == g;
  return PerfectPartialMatching(p, g);
}

double QuantityAccuracy(std::span<const Description> predicted,
                        std::span<const Description> gold, MatchMode mode) {
  CheckAligned(predicted.size(), gold.size());
  if (predicted.empty()) return 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    hits += DescriptionsMatch(predicted[i], gold[i], mode);
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace quantret
