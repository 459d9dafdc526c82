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

#include "quantret/tagger.h"

#include <algorithm>
#include <limits>
#include <random>
#include <unordered_set>

#include "binary_io.h"
#include "quantret/error.h"

namespace quantret {
namespace {

constexpr std::string_view kTaggerMagic = "QRTAGGER";

bool HasLetter(std::string_view text) {
  size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = DecodeUtf8(text, pos);
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || IsCjk(cp) ||
        (cp >= 0xC0 && cp < 0x2000)) {
      return true;
    }
  }
  return false;
}

bool IsYearToken(std::string_view text) {
  if (text.size() != 4) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  int year = (text[0] - '0') * 1000 + (text[1] - '0') * 100 +
             (text[2] - '0') * 10 + (text[3] - '0');
  return year >= 1900 && year <= 2100;
}

bool IsNumeric(std::string_view text) {
  bool digit = false;
  for (char c : text) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c != ',' && c != '.' && c != '%' && c != '-' && c != '+') {
      return false;
    }
  }
  return digit;
}

std::string Shape(std::string_view text) {
  std::string out;
  size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = DecodeUtf8(text, pos);
    char s;
    if (cp >= 'A' && cp <= 'Z') {
      s = 'X';
    } else if (cp >= 'a' && cp <= 'z') {
      s = 'x';
    } else if (cp >= '0' && cp <= '9') {
      s = 'd';
    } else if (IsCjk(cp)) {
      s = 'C';
    } else if (cp < 0x80) {
      s = static_cast<char>(cp);
    } else {
      s = 'u';
    }
    if (out.empty() || out.back() != s) out += s;
  }
  return out;
}

std::string DistanceBucket(size_t d) {
  if (d <= 4) return std::to_string(d);
  if (d <= 6) return "5-6";
  if (d <= 10) return "7-10";
  return "11+";
}

std::string RelativePosition(const PivotSentence &ps, size_t pos) {
  if (pos == ps.start_marker()) return "M<";
  if (pos == ps.end_marker()) return "M>";
  if (ps.IsPivot(pos)) return "P";
  if (pos < ps.start_marker()) return "L" + DistanceBucket(ps.start_marker() - pos);
  return "R" + DistanceBucket(pos - ps.end_marker());
}

bool Allowed(int prev, int cur) {
  constexpr int kB = 0, kI = 1, kE = 2, kO = 3;
  switch (prev) {
    case -1:
    case kO:
    case kE:
      return cur == kB || cur == kO;
    case kB:
      return true;
    case kI:
      return cur == kI || cur == kE;
  }
  return false;
}

}  // namespace

TagSequence TagSentence(const PivotSentence &sentence, const Tagger &tagger) {
  return RepairTags(tagger.Tag(sentence), sentence);
}

Description ParseDescription(std::span<const Token> tokens,
                             const RawQuantity &pivot, const Tagger &tagger) {
  PivotSentence ps = MarkPivot(tokens, pivot);
  return DecodeTags(TagSentence(ps, tagger), ps);
}

// --- RuleBaselineTagger ---------------------------------------------------

RuleBaselineTagger::RuleBaselineTagger() = default;

RuleBaselineTagger::RuleBaselineTagger(QuantityExtractor extractor)
    : extractor_(std::move(extractor)) {}

bool RuleBaselineTagger::IsFunctionWord(std::string_view lowered) {
  static const std::unordered_set<std::string_view> kWords = {
      "a", "an", "the", "of", "in", "on", "at", "for", "to", "from", "by",
      "with", "and", "or", "as", "into", "over", "than", "up", "down",
      "about", "approximately", "around", "nearly", "almost", "only",
      "is", "are", "was", "were", "be", "been", "being", "has", "have",
      "had", "will", "would", "reached", "reach", "reaching", "reaches",
      "amounted", "amounting", "amounts", "totaled", "totalled", "totaling",
      "grew", "grown", "growing", "increased", "decreased", "rose", "fell",
      "dropped", "declined", "recorded", "reported", "achieved", "stood",
      "respectively", "compared", "which", "that", "this", "these", "those",
      "its", "their", "our", "it", "they", "we", "while", "both", "each",
      "per", "s", "'s", "an", "also", "further"};
  return kWords.count(lowered) > 0;
}

TagSequence RuleBaselineTagger::Tag(const PivotSentence &sentence) const {
  TagSequence tags(sentence.tokens.size(), quantret::Tag::kO);
  std::vector<Token> plain = StripMarkers(sentence);
  std::vector<bool> in_quantity(plain.size(), false);
  for (const RawQuantity &q : extractor_.Extract(plain)) {
    for (size_t i = q.begin; i < q.end; ++i) in_quantity[i] = true;
  }
  const auto noun_like = [&](size_t pos) {
    long orig = sentence.OriginalIndex(pos);
    if (orig < 0 || in_quantity[static_cast<size_t>(orig)]) return false;
    const std::string &text = sentence.tokens[pos].text;
    return HasLetter(text) && !IsFunctionWord(AsciiLower(text));
  };

  size_t start = sentence.start_marker();
  // Nearest noun-like window left of the pivot.
  long p = static_cast<long>(start) - 1;
  while (p >= 0 && !noun_like(static_cast<size_t>(p))) --p;
  if (p >= 0) {
    long hi = p;
    while (p >= 0 && noun_like(static_cast<size_t>(p))) --p;
    long lo = p + 1;
    tags[lo] = quantret::Tag::kB;
    if (hi > lo) {
      for (long i = lo + 1; i < hi; ++i) tags[i] = quantret::Tag::kI;
      tags[hi] = quantret::Tag::kE;
    }
  }
  for (size_t pos = 0; pos < start; ++pos) {
    if (tags[pos] == quantret::Tag::kO && IsYearToken(sentence.tokens[pos].text)) {
      tags[pos] = quantret::Tag::kB;
    }
  }
  return tags;
}

void RuleBaselineTagger::Save(const std::string &path) const {
  internal::ByteWriter w;
  w.PutBytes(kTaggerMagic.data(), kTaggerMagic.size());
  w.PutString(name());
  internal::WriteBinaryFile(path, w.bytes());
}

// --- PerceptronTagger -----------------------------------------------------

std::vector<std::string> PerceptronTagger::Features(
    const PivotSentence &ps, size_t pos) {
  const std::vector<Token> &tokens = ps.tokens;
  const std::string &word = tokens[pos].text;
  std::string lower = AsciiLower(word);
  std::vector<std::string> f;
  f.reserve(12);
  f.emplace_back("bias");
  f.push_back("w=" + word);
  f.push_back("lw=" + lower);
  f.push_back("sh=" + Shape(word));
  if (IsNumeric(word)) f.emplace_back("digit");
  if (IsYearToken(word)) f.emplace_back("year");
  f.push_back("rel=" + RelativePosition(ps, pos));
  const auto window = [&](long offset) -> std::string {
    long i = static_cast<long>(pos) + offset;
    if (i < 0) return "<s>";
    if (i >= static_cast<long>(tokens.size())) return "</s>";
    return AsciiLower(tokens[static_cast<size_t>(i)].text);
  };
  f.push_back("w-2=" + window(-2));
  f.push_back("w-1=" + window(-1));
  f.push_back("w+1=" + window(1));
  f.push_back("w+2=" + window(2));
  return f;
}

std::vector<std::vector<int>> PerceptronTagger::Lookup(
    const PivotSentence &sentence) const {
  std::vector<std::vector<int>> ids(sentence.tokens.size());
  for (size_t pos = 0; pos < sentence.tokens.size(); ++pos) {
    for (const std::string &name : Features(sentence, pos)) {
      auto it = feature_ids_.find(name);
      if (it != feature_ids_.end()) ids[pos].push_back(it->second);
    }
  }
  return ids;
}

TagSequence PerceptronTagger::Viterbi(
    const PivotSentence &sentence, const std::vector<std::vector<int>> &features,
    const std::vector<double> &emission,
    const std::vector<double> &transition) const {
  const size_t n = sentence.tokens.size();
  if (n == 0) return {};
  constexpr double kNeg = -std::numeric_limits<double>::infinity();
  std::vector<TagScores> delta(n);
  std::vector<std::array<int, kNumTags>> back(n);
  const auto emit = [&](size_t t, int y) {
    if ((sentence.IsMarker(t) || sentence.IsPivot(t)) &&
        y != static_cast<int>(quantret::Tag::kO)) {
      return kNeg;
    }
    double s = 0;
    for (int f : features[t]) s += emission[static_cast<size_t>(f) * kNumTags + y];
    return s;
  };
  for (int y = 0; y < kNumTags; ++y) {
    delta[0][y] = Allowed(-1, y) ? emit(0, y) + transition[y] : kNeg;
    back[0][y] = -1;
  }
  for (size_t t = 1; t < n; ++t) {
    for (int y = 0; y < kNumTags; ++y) {
      double e = emit(t, y);
      double best = kNeg;
      int arg = -1;
      if (e != kNeg) {
        for (int p = 0; p < kNumTags; ++p) {
          if (delta[t - 1][p] == kNeg || !Allowed(p, y)) continue;
          double s = delta[t - 1][p] + transition[(p + 1) * kNumTags + y];
          if (s > best) {
            best = s;
            arg = p;
          }
        }
      }
      delta[t][y] = arg < 0 ? kNeg : best + e;
      back[t][y] = arg;
    }
  }
  int last = -1;
  double best = kNeg;
  for (int y = 0; y < kNumTags; ++y) {
    if (y == static_cast<int>(quantret::Tag::kI)) continue;
    if (delta[n - 1][y] > best) {
      best = delta[n - 1][y];
      last = y;
    }
  }
  TagSequence tags(n, quantret::Tag::kO);
  if (last < 0) return tags;
  for (size_t t = n; t-- > 0;) {
    tags[t] = static_cast<quantret::Tag>(last);
    last = back[t][last];
  }
  return tags;
}

TagSequence PerceptronTagger::Tag(const PivotSentence &sentence) const {
  if (transition_.empty()) return TagSequence(sentence.tokens.size(), quantret::Tag::kO);
  return Viterbi(sentence, Lookup(sentence), emission_, transition_);
}

PerceptronTagger PerceptronTagger::Train(std::span<const LabeledExample> data,
                                         int epochs, uint64_t seed,
                                         TaggerTrainingReport *report) {
  if (data.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no labeled examples to train on");
  }
  PerceptronTagger model;
  model.seed_ = seed;

  struct Prepared {
    PivotSentence sentence;
    std::vector<std::vector<int>> features;
    TagSequence gold;
  };
  std::vector<Prepared> prepared;
  prepared.reserve(data.size());
  for (const LabeledExample &ex : data) {
    Prepared p;
    p.sentence = MarkPivot(ex.tokens, ex.pivot);
    p.gold = EncodeForPivot(ex.gold, p.sentence);
    p.features.resize(p.sentence.tokens.size());
    for (size_t pos = 0; pos < p.sentence.tokens.size(); ++pos) {
      for (std::string &name : Features(p.sentence, pos)) {
        auto [it, inserted] = model.feature_ids_.try_emplace(
            name, static_cast<int>(model.feature_names_.size()));
        if (inserted) model.feature_names_.push_back(std::move(name));
        p.features[pos].push_back(it->second);
      }
    }
    prepared.push_back(std::move(p));
  }

  const size_t num_emission = model.feature_names_.size() * kNumTags;
  const size_t num_transition = (kNumTags + 1) * kNumTags;
  std::vector<double> w_emit(num_emission, 0.0), u_emit(num_emission, 0.0);
  std::vector<double> w_trans(num_transition, 0.0), u_trans(num_transition, 0.0);
  double step = 1.0;

  const auto averaged = [&](const std::vector<double> &w,
                            const std::vector<double> &u) {
    std::vector<double> avg(w.size());
    for (size_t i = 0; i < w.size(); ++i) avg[i] = w[i] - u[i] / step;
    return avg;
  };

  std::mt19937_64 rng(seed);
  std::vector<size_t> order(prepared.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t idx : order) {
      const Prepared &p = prepared[idx];
      TagSequence pred = model.Viterbi(p.sentence, p.features, w_emit, w_trans);
      if (pred != p.gold) {
        const auto bump = [&](std::vector<double> &w, std::vector<double> &u,
                              size_t i, double d) {
          w[i] += d;
          u[i] += step * d;
        };
        for (size_t t = 0; t < pred.size(); ++t) {
          int g = static_cast<int>(p.gold[t]);
          int y = static_cast<int>(pred[t]);
          if (g != y) {
            for (int f : p.features[t]) {
              bump(w_emit, u_emit, static_cast<size_t>(f) * kNumTags + g, 1.0);
              bump(w_emit, u_emit, static_cast<size_t>(f) * kNumTags + y, -1.0);
            }
          }
          int gp = t == 0 ? -1 : static_cast<int>(p.gold[t - 1]);
          int yp = t == 0 ? -1 : static_cast<int>(pred[t - 1]);
          if (g != y || gp != yp) {
            bump(w_trans, u_trans, static_cast<size_t>((gp + 1) * kNumTags + g), 1.0);
            bump(w_trans, u_trans, static_cast<size_t>((yp + 1) * kNumTags + y), -1.0);
          }
        }
      }
      step += 1.0;
    }
    if (report != nullptr) {
      std::vector<double> ae = averaged(w_emit, u_emit);
      std::vector<double> at = averaged(w_trans, u_trans);
      std::vector<Description> pred, gold;
      for (const Prepared &p : prepared) {
        pred.push_back(
            DecodeTags(model.Viterbi(p.sentence, p.features, ae, at), p.sentence));
        gold.push_back(DecodeTags(p.gold, p.sentence));
      }
      report->epoch_f1.push_back(SegmentPrf(pred, gold, MatchMode::kStrict).f1);
    }
  }
  model.emission_ = averaged(w_emit, u_emit);
  model.transition_ = averaged(w_trans, u_trans);
  return model;
}

bool PerceptronTagger::operator==(const PerceptronTagger &other) const {
  return seed_ == other.seed_ && feature_names_ == other.feature_names_ &&
         emission_ == other.emission_ && transition_ == other.transition_;
}

std::string PerceptronTagger::Serialize() const {
  internal::ByteWriter w;
  w.PutBytes(kTaggerMagic.data(), kTaggerMagic.size());
  w.PutString(name());
  w.Put<uint32_t>(kFeatureTemplateVersion);
  w.Put<uint64_t>(seed_);
  w.Put<uint64_t>(feature_names_.size());
  for (const std::string &f : feature_names_) w.PutString(f);
  w.Put<uint64_t>(emission_.size());
  w.PutBytes(emission_.data(), emission_.size() * sizeof(double));
  w.Put<uint64_t>(transition_.size());
  w.PutBytes(transition_.data(), transition_.size() * sizeof(double));
  return w.bytes();
}

PerceptronTagger PerceptronTagger::Deserialize(std::string_view bytes) {
  internal::ByteReader r(bytes);
  char magic[8];
  r.GetBytes(magic, sizeof(magic));
  if (std::string_view(magic, 8) != kTaggerMagic || r.GetString() != "perceptron") {
    throw Error(ErrorCode::kParseError, "not a perceptron tagger model");
  }
  auto version = r.Get<uint32_t>();
  if (version != kFeatureTemplateVersion) {
    throw Error(ErrorCode::kSchemaVersionMismatch,
                "feature template version " + std::to_string(version) +
                    ", expected " + std::to_string(kFeatureTemplateVersion));
  }
  PerceptronTagger model;
  model.seed_ = r.Get<uint64_t>();
  auto nf = r.Get<uint64_t>();
  model.feature_names_.reserve(nf);
  for (uint64_t i = 0; i < nf; ++i) {
    model.feature_names_.push_back(r.GetString());
    model.feature_ids_.emplace(model.feature_names_.back(), static_cast<int>(i));
  }
  auto ne = r.Get<uint64_t>();
  if (ne != nf * kNumTags) throw Error(ErrorCode::kParseError, "bad emission table");
  model.emission_.resize(ne);
  r.GetBytes(model.emission_.data(), ne * sizeof(double));
  auto nt = r.Get<uint64_t>();
  if (nt != (kNumTags + 1) * kNumTags) {
    throw Error(ErrorCode::kParseError, "bad transition table");
  }
  model.transition_.resize(nt);
  r.GetBytes(model.transition_.data(), nt * sizeof(double));
  return model;
}

void PerceptronTagger::Save(const std::string &path) const {
  internal::WriteBinaryFile(path, Serialize());
}

std::unique_ptr<Tagger> LoadTagger(const std::string &path) {
  std::string bytes = internal::ReadBinaryFile(path);
  try {
    internal::ByteReader r(bytes);
    char magic[8];
    r.GetBytes(magic, sizeof(magic));
    if (std::string_view(magic, 8) != kTaggerMagic) {
      throw Error(ErrorCode::kParseError, "not a tagger model");
    }
    std::string kind = r.GetString();
    if (kind == "rule") return std::make_unique<RuleBaselineTagger>();
    if (kind == "perceptron") {
      return std::make_unique<PerceptronTagger>(
          PerceptronTagger::Deserialize(bytes));
    }
    throw Error(ErrorCode::kParseError, "unknown tagger kind " + kind);
  } catch (const Error &e) {
    if (!e.file().empty()) throw;
    throw Error(e.code(), e.what(), path, 0);
  }
}

}  // namespace quantret
