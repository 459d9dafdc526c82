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

#include "quantret/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "quantret/error.h"
#include "quantret/quantity.h"
#include "quantret/text.h"

namespace quantret {
namespace {

// Portable draws on top of mt19937_64 so output does not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}
  size_t Below(size_t n) { return static_cast<size_t>(engine_() % n); }
  size_t Between(size_t lo, size_t hi) { return lo + Below(hi - lo + 1); }
  double Unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Unit(); }
  bool Chance(double p) { return Unit() < p; }
  template <typename T>
  void Shuffle(std::vector<T> &v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[Below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

constexpr const char *kEntityPrefixes[] = {
    "Alder",     "Birch",      "Cedar",      "Dunmore",   "Elmstead",
    "Fairholt",  "Glenrock",   "Harrow",     "Ivybridge", "Juniper",
    "Kestrel",   "Larkspur",   "Marlow",     "Northwind", "Oakhurst",
    "Pinecrest", "Quarrytown", "Redfern",    "Silverton", "Thornbury",
    "Umberlake", "Valemont",   "Westbrook",  "Yarrow",    "Zephyr",
    "Ashdown",   "Brackley",   "Copperfield", "Driftwood", "Emberly"};
constexpr const char *kEntitySuffixes[] = {
    "Holdings", "Energy", "Logistics", "Pharma",  "Motors",
    "Textiles", "Foods",  "Capital",   "Steel",   "Telecom"};
constexpr const char *kPlaces[] = {
    "the Northern Region", "the Eastern Province", "the Lake District",
    "Riverside County",    "the Highland Area",    "the Southern Coast",
    "the Central Plains",  "Harbor City"};

enum class Measure { kCurrency, kCount, kPercent };

struct Indicator {
  const char *variants[3];
  Measure measure;
  const char *unit;  // count unit word
  double log_lo;
  double log_hi;
};

// Variants of one indicator use different words; some words recur across
// indicators so lexically close descriptions can state different facts.
constexpr Indicator kIndicators[] = {
    {{"operating revenue", "total turnover", "sales income"}, Measure::kCurrency, "", 8.0, 11.0},
    {{"net profit", "profit after tax", "net earnings"}, Measure::kCurrency, "", 7.0, 10.0},
    {{"total assets", "asset base", "balance sheet size"}, Measure::kCurrency, "", 8.5, 11.5},
    {{"research spending", "development investment", "innovation expenditure"}, Measure::kCurrency, "", 6.5, 9.0},
    {{"operating cost", "running expenses", "cost of operations"}, Measure::kCurrency, "", 7.5, 10.5},
    {{"dividend payout", "shareholder distribution", "cash dividends"}, Measure::kCurrency, "", 6.5, 9.0},
    {{"tax paid", "fiscal contribution", "tax payments"}, Measure::kCurrency, "", 6.5, 9.0},
    {{"capital expenditure", "capex outlay", "fixed asset investment"}, Measure::kCurrency, "", 7.0, 10.0},
    {{"staff headcount", "workforce size", "number of staff"}, Measure::kCount, "employees", 2.5, 5.0},
    {{"vehicle deliveries", "car sales volume", "auto shipments"}, Measure::kCount, "vehicles", 3.0, 6.0},
    {{"steel output", "production volume", "manufactured tonnage"}, Measure::kCount, "tons", 4.0, 7.0},
    {{"customer base", "client count", "number of subscribers"}, Measure::kCount, "customers", 3.0, 6.5},
    {{"gross margin", "gross profit ratio", "markup rate"}, Measure::kPercent, "", 0.7, 1.7},
    {{"market share", "share of the market", "sales share"}, Measure::kPercent, "", 0.3, 1.5},
    {{"debt ratio", "leverage level", "liabilities to assets ratio"}, Measure::kPercent, "", 1.0, 1.9},
    {{"return on equity", "equity yield", "shareholder return rate"}, Measure::kPercent, "", 0.4, 1.4},
};
constexpr size_t kNumIndicators = sizeof(kIndicators) / sizeof(kIndicators[0]);

// Share of distractor sentences that state the change as a number.
constexpr double kNumericChangeRate = 0.3;

constexpr const char *kPrefixes[] = {"According to the annual report ,",
                                     "As disclosed in the filing ,",
                                     "Despite market volatility ,"};
constexpr const char *kSuffixes[] = {", driven by steady demand",
                                     ", the company said",
                                     ", in line with the budget plan"};
constexpr const char *kFillers[] = {
    "The board of directors approved the report .",
    "Management remains cautious about the outlook .",
    "The group continued to optimize its business structure .",
    "Risk controls were strengthened across all units ."};

// value = digits * 10^exponent
struct Decimal {
  std::string digits;
  int exponent = 0;

  double ToDouble() const {
    return std::stod(digits) * std::pow(10.0, exponent);
  }
};

Decimal Quantize(double value, int sig) {
  int e = static_cast<int>(std::floor(std::log10(value))) - (sig - 1);
  long long m = std::llround(value / std::pow(10.0, e));
  long long limit = 1;
  for (int i = 0; i < sig; ++i) limit *= 10;
  if (m >= limit) {
    m = (m + 5) / 10;
    ++e;
  }
  if (m < limit / 10) m = limit / 10;
  return {std::to_string(m), e};
}

std::string GroupThousands(const std::string &integer) {
  std::string out;
  int n = static_cast<int>(integer.size());
  for (int i = 0; i < n; ++i) {
    if (i > 0 && (n - i) % 3 == 0) out += ',';
    out += integer[i];
  }
  return out;
}

// digits * 10^shift as a decimal numeral with thousands separators.
std::string Numeral(const std::string &digits, int shift) {
  std::string integer;
  std::string fraction;
  if (shift >= 0) {
    integer = digits + std::string(shift, '0');
  } else {
    long pos = static_cast<long>(digits.size()) + shift;
    if (pos > 0) {
      integer = digits.substr(0, pos);
      fraction = digits.substr(pos);
    } else {
      integer = "0";
      fraction = std::string(-pos, '0') + digits;
    }
  }
  std::string out = GroupThousands(integer);
  if (!fraction.empty()) out += "." + fraction;
  return out;
}

std::string Surface(const Indicator &ind, const Decimal &v, Rng &rng) {
  switch (ind.measure) {
    case Measure::kCurrency: {
      double x = v.ToDouble();
      int power = x >= 1e9 && !rng.Chance(0.25) ? 9 : 6;
      return Numeral(v.digits, v.exponent - power) +
             (power == 9 ? " billion yuan" : " million yuan");
    }
    case Measure::kCount:
      return Numeral(v.digits, v.exponent) + " " + ind.unit;
    case Measure::kPercent:
      return Numeral(v.digits, v.exponent) + "%";
  }
  return {};
}

struct Fact {
  std::string id;
  size_t entity = 0;
  size_t indicator = 0;
  int year = 0;
  int place = -1;
  Decimal value;
  int prev = -1;  // same series, previous year
  int next = -1;
};

struct Piece {
  std::string text;
  int group = -1;  // segment group id
  int value = -1;  // value slot id
  bool attach = false;
};

struct ValueSlot {
  std::string surface;
  std::string fact_id;
  std::vector<int> groups;
};

// A sentence assembled from pieces whose token spans are tracked.
class Builder {
 public:
  Builder &Words(std::string text) {
    pieces_.push_back({std::move(text), -1, -1, false});
    return *this;
  }
  Builder &Punct(std::string text) {
    pieces_.push_back({std::move(text), -1, -1, true});
    return *this;
  }
  int Seg(std::string text) {
    int g = next_group_++;
    pieces_.push_back({std::move(text), g, -1, false});
    return g;
  }
  int Value(std::string surface, std::string fact_id) {
    int v = static_cast<int>(slots_.size());
    pieces_.push_back({surface, -1, v, false});
    slots_.push_back({std::move(surface), std::move(fact_id), {}});
    return v;
  }
  void Describe(int value, std::vector<int> groups) {
    slots_[value].groups = std::move(groups);
  }

  struct Built {
    std::string text;
    std::vector<Token> tokens;
    std::vector<LabeledExample> examples;
    std::vector<SyntheticMention> mentions;
  };

  Built Build(const QuantityExtractor &extractor) const {
    Built out;
    std::vector<std::string> words;
    std::map<int, Segment> group_spans;
    std::vector<Segment> value_spans(slots_.size());
    for (const Piece &p : pieces_) {
      if (!out.text.empty() && !p.attach) out.text += ' ';
      out.text += p.text;
      size_t begin = words.size();
      for (std::string &w : TokenizeWords(p.text)) words.push_back(std::move(w));
      if (p.group >= 0) group_spans[p.group] = {begin, words.size()};
      if (p.value >= 0) value_spans[p.value] = {begin, words.size()};
    }
    if (TokenizeWords(out.text) != words) {
      throw Error(ErrorCode::kInvalidArgument,
                  "generator pieces do not tokenize cleanly: " + out.text);
    }
    out.tokens = MakeTokens(words);
    std::vector<RawQuantity> found = extractor.Extract(out.tokens);
    if (found.size() != slots_.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "generator quantities disagree with the extractor: " + out.text);
    }
    for (size_t v = 0; v < slots_.size(); ++v) {
      if (found[v].begin != value_spans[v].begin ||
          found[v].end != value_spans[v].end) {
        throw Error(ErrorCode::kInvalidArgument,
                    "generator value span mismatch: " + out.text);
      }
      std::vector<Segment> segs;
      for (int g : slots_[v].groups) segs.push_back(group_spans.at(g));
      std::sort(segs.begin(), segs.end());
      LabeledExample ex;
      ex.tokens = out.tokens;
      ex.pivot = found[v];
      ex.gold = MakeDescription(out.tokens, std::move(segs));
      out.examples.push_back(std::move(ex));
      out.mentions.push_back({found[v].surface, slots_[v].fact_id});
    }
    return out;
  }

 private:
  std::vector<Piece> pieces_;
  std::vector<ValueSlot> slots_;
  int next_group_ = 0;
};

struct Plan {
  Builder builder;
  std::set<std::string> facts;
  bool distractor = false;
};

class World {
 public:
  World(const SyntheticCorpusSpec &spec) : spec_(spec), rng_(spec.seed) {
    for (const char *p : kEntityPrefixes) {
      for (const char *s : kEntitySuffixes) {
        entities_.push_back(std::string(p) + " " + s);
      }
    }
    rng_.Shuffle(entities_);
    entities_.resize(48);
    MakeFacts();
  }

  SyntheticCorpus Generate() {
    std::vector<Plan> plans = PlanSentences();
    SyntheticCorpus corpus;
    corpus.facts = facts_.size();
    size_t distractors = 0;
    for (const auto &p : plans) distractors += p.distractor;
    corpus.distractor_fraction =
        plans.empty() ? 0.0 : static_cast<double>(distractors) / plans.size();
    Assemble(plans, corpus);
    return corpus;
  }

 private:
  static std::string Variant(const Fact &f, size_t v) {
    return kIndicators[f.indicator].variants[v];
  }

  size_t PickVariant() {
    double u = rng_.Unit();
    return u < 0.5 ? 0 : (u < 0.75 ? 1 : 2);
  }

  void MakeFacts() {
    std::set<std::pair<size_t, size_t>> used;
    const size_t max_series = entities_.size() * kNumIndicators;
    while (facts_.size() < spec_.facts && used.size() < max_series) {
      size_t e = rng_.Below(entities_.size());
      size_t i = rng_.Below(kNumIndicators);
      if (!used.insert({e, i}).second) continue;
      const Indicator &ind = kIndicators[i];
      int start = 2014 + static_cast<int>(rng_.Below(6));
      size_t length = rng_.Between(3, 5);
      int place = rng_.Chance(0.2) ? static_cast<int>(rng_.Below(std::size(kPlaces))) : -1;
      double value = std::pow(10.0, rng_.Uniform(ind.log_lo, ind.log_hi));
      int prev = -1;
      for (size_t y = 0; y < length; ++y) {
        Fact f;
        f.id = "f" + std::to_string(facts_.size());
        f.entity = e;
        f.indicator = i;
        f.year = start + static_cast<int>(y);
        f.place = place;
        int sig = static_cast<int>(rng_.Between(
            static_cast<size_t>(spec_.min_sig_digits),
            static_cast<size_t>(spec_.max_sig_digits)));
        f.value = Quantize(value, sig);
        f.prev = prev;
        if (prev >= 0) facts_[prev].next = static_cast<int>(facts_.size());
        prev = static_cast<int>(facts_.size());
        facts_.push_back(std::move(f));
        double g = rng_.Uniform(0.02, 0.3) * (rng_.Chance(0.75) ? 1 : -1);
        value *= 1 + g;
        if (ind.measure == Measure::kPercent) value = std::min(value, 95.0);
      }
    }
  }

  std::string MentionSurface(const Fact &f) {
    Decimal v = f.value;
    int sig = static_cast<int>(v.digits.size());
    if (sig > spec_.min_sig_digits && rng_.Chance(spec_.rounded_mention_rate)) {
      int places = static_cast<int>(rng_.Between(
          static_cast<size_t>(spec_.min_sig_digits), static_cast<size_t>(sig - 1)));
      v.digits = RoundSignificant(v.digits, places, v.exponent);
    }
    return Surface(kIndicators[f.indicator], v, rng_);
  }

  // Change from the previous year; percent indicators change in points,
  // written after the number as plain words.
  std::string ChangeText(const Fact &f, bool &up, bool &points) {
    const Fact &p = facts_[f.prev];
    double a = p.value.ToDouble();
    double b = f.value.ToDouble();
    points = kIndicators[f.indicator].measure == Measure::kPercent;
    double change = points ? b - a : (b / a - 1) * 100;
    up = change > 0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", std::fabs(change));
    if (std::string(buf) == "0.00") return {};
    return std::string(buf) + (points ? "" : "%");
  }

  void Decorate(Builder &b, bool prefix) {
    if (prefix && rng_.Chance(0.2)) b.Words(kPrefixes[rng_.Below(std::size(kPrefixes))]);
  }

  void Close(Builder &b) {
    if (rng_.Chance(0.2)) {
      std::string s = kSuffixes[rng_.Below(std::size(kSuffixes))];
      b.Punct(",");
      b.Words(s.substr(2));
    }
    b.Punct(".");
  }

  // Optional place segment appended to `groups`.
  void Place(Builder &b, const Fact &f, std::vector<int> &groups) {
    if (f.place < 0) return;
    b.Words("in");
    groups.push_back(b.Seg(kPlaces[f.place]));
  }

  Plan Single(const Fact &f) {
    Plan plan;
    Builder &b = plan.builder;
    const std::string ind = Variant(f, PickVariant());
    const std::string year = std::to_string(f.year);
    const std::string &entity = entities_[f.entity];
    std::vector<int> g;
    int v = -1;
    switch (rng_.Below(4)) {
      case 0:
        Decorate(b, true);
        b.Words("In");
        g.push_back(b.Seg(year));
        b.Punct(",");
        g.push_back(b.Seg(entity));
        b.Words("recorded");
        g.push_back(b.Seg(ind));
        b.Words("of");
        v = b.Value(MentionSurface(f), f.id);
        Place(b, f, g);
        break;
      case 1:
        Decorate(b, true);
        b.Words("the");
        g.push_back(b.Seg(ind));
        b.Words("of");
        g.push_back(b.Seg(entity));
        Place(b, f, g);
        b.Words("reached");
        v = b.Value(MentionSurface(f), f.id);
        b.Words("in");
        g.push_back(b.Seg(year));
        break;
      case 2:
        g.push_back(b.Seg(entity));
        b.Words("reported");
        g.push_back(b.Seg(ind));
        b.Words("of");
        v = b.Value(MentionSurface(f), f.id);
        b.Words("for");
        g.push_back(b.Seg(year));
        Place(b, f, g);
        break;
      default:
        b.Words("In");
        g.push_back(b.Seg(year));
        b.Punct(",");
        b.Words("the");
        g.push_back(b.Seg(ind));
        b.Words("at");
        g.push_back(b.Seg(entity));
        Place(b, f, g);
        b.Words("stood at");
        v = b.Value(MentionSurface(f), f.id);
        break;
    }
    b.Describe(v, g);
    Close(b);
    plan.facts = {f.id};
    return plan;
  }

  // Next-year value compared against the previous year.
  std::optional<Plan> Distractor(const Fact &f) {
    bool up = false;
    bool points = false;
    std::string change = ChangeText(f, up, points);
    if (change.empty()) return std::nullopt;
    // Mostly the change is stated in words, leaving the earlier year in the
    // sentence but in no quantity's description.
    if (!rng_.Chance(kNumericChangeRate)) change.clear();
    const Fact &p = facts_[f.prev];
    Plan plan;
    plan.distractor = true;
    Builder &b = plan.builder;
    const std::string ind = Variant(f, PickVariant());
    const std::string year = std::to_string(f.year);
    const std::string prev_year = std::to_string(p.year);
    const std::string &entity = entities_[f.entity];
    const std::string growth_id = "g" + p.id.substr(1) + "-" + f.id.substr(1);
    std::vector<int> vg;
    std::vector<int> cg;
    int c = -1;
    if (rng_.Chance(0.5)) {
      b.Words("In");
      int gy = b.Seg(year);
      b.Punct(",");
      int ge = b.Seg(entity);
      int gi = b.Seg(ind);
      vg = {gy, ge, gi};
      Place(b, f, vg);
      b.Words("was");
      int v = b.Value(MentionSurface(f), f.id);
      b.Punct(",");
      int gu = b.Seg(up ? "up" : "down");
      if (!change.empty()) {
        c = b.Value(change, growth_id);
        if (points) b.Words("percentage points");
        int gc = b.Seg("compared to " + prev_year);
        cg = vg;
        cg.push_back(gu);
        cg.push_back(gc);
      } else {
        b.Words("from " + prev_year);
      }
      b.Describe(v, vg);
    } else {
      int gc = b.Seg("Compared with " + prev_year);
      b.Punct(",");
      b.Words("the");
      int gi = b.Seg(ind);
      b.Words("of");
      int ge = b.Seg(entity);
      vg = {gi, ge};
      Place(b, f, vg);
      int gu = b.Seg(up ? "rose" : "fell");
      if (!change.empty()) {
        b.Words("by");
        c = b.Value(change, growth_id);
        if (points) b.Words("percentage points");
      }
      b.Words("to");
      int v = b.Value(MentionSurface(f), f.id);
      b.Words("in");
      int gy = b.Seg(year);
      vg.push_back(gy);
      cg = vg;
      cg.push_back(gc);
      cg.push_back(gu);
      b.Describe(v, vg);
    }
    if (c >= 0) b.Describe(c, cg);
    Close(b);
    plan.facts = {f.id, p.id};
    return plan;
  }

  // Two years of one series, "respectively".
  Plan TwoYears(const Fact &a, const Fact &c) {
    Plan plan;
    Builder &b = plan.builder;
    const std::string ind = Variant(a, PickVariant());
    b.Words("The");
    int gi = b.Seg(ind);
    b.Words("of");
    int ge = b.Seg(entities_[a.entity]);
    std::vector<int> base = {gi, ge};
    Place(b, a, base);
    b.Words("in");
    int y0 = b.Seg(std::to_string(a.year));
    b.Words("and");
    int y1 = b.Seg(std::to_string(c.year));
    b.Words("was");
    int v0 = b.Value(MentionSurface(a), a.id);
    b.Words("and");
    int v1 = b.Value(MentionSurface(c), c.id);
    b.Words("respectively");
    b.Punct(".");
    std::vector<int> g0 = base;
    g0.push_back(y0);
    std::vector<int> g1 = base;
    g1.push_back(y1);
    b.Describe(v0, g0);
    b.Describe(v1, g1);
    plan.facts = {a.id, c.id};
    return plan;
  }

  // Two entities, same indicator and year, "respectively".
  Plan TwoEntities(const Fact &a, const Fact &c) {
    Plan plan;
    Builder &b = plan.builder;
    const std::string ind = Variant(a, PickVariant());
    b.Words("In");
    int gy = b.Seg(std::to_string(a.year));
    b.Punct(",");
    b.Words("the");
    int gi = b.Seg(ind);
    b.Words("of");
    int e0 = b.Seg(entities_[a.entity]);
    b.Words("and");
    int e1 = b.Seg(entities_[c.entity]);
    b.Words("was");
    int v0 = b.Value(MentionSurface(a), a.id);
    b.Words("and");
    int v1 = b.Value(MentionSurface(c), c.id);
    b.Words("respectively");
    b.Punct(".");
    b.Describe(v0, {gy, gi, e0});
    b.Describe(v1, {gy, gi, e1});
    plan.facts = {a.id, c.id};
    return plan;
  }

  Plan Note() {
    Plan plan;
    Builder &b = plan.builder;
    b.Words("Further details are disclosed in Note");
    int v = b.Value(std::to_string(rng_.Between(3, 48)), "");
    b.Describe(v, {});
    b.Punct(".");
    return plan;
  }

  std::vector<Plan> PlanSentences() {
    std::vector<size_t> remaining(facts_.size());
    std::vector<size_t> slots;
    size_t with_prev = 0;
    for (size_t f = 0; f < facts_.size(); ++f) {
      remaining[f] = rng_.Between(spec_.min_mentions, spec_.max_mentions);
      for (size_t m = 0; m < remaining[f]; ++m) slots.push_back(f);
      with_prev += facts_[f].prev >= 0;
    }
    rng_.Shuffle(slots);
    std::map<std::pair<size_t, int>, std::vector<size_t>> by_indicator_year;
    for (size_t f = 0; f < facts_.size(); ++f) {
      if (facts_[f].place < 0) {
        by_indicator_year[{facts_[f].indicator, facts_[f].year}].push_back(f);
      }
    }
    const double eligible =
        facts_.empty() ? 1.0 : static_cast<double>(with_prev) / facts_.size();
    const double p_distractor = std::min(1.0, spec_.distractor_rate / eligible);

    std::vector<Plan> plans;
    for (size_t f : slots) {
      if (remaining[f] == 0) continue;
      const Fact &fact = facts_[f];
      --remaining[f];
      if (fact.prev >= 0 && rng_.Chance(p_distractor)) {
        if (auto plan = Distractor(fact)) {
          plans.push_back(std::move(*plan));
          continue;
        }
      }
      double u = rng_.Unit();
      if (u < 0.1 && fact.next >= 0 && remaining[fact.next] > 0) {
        --remaining[fact.next];
        plans.push_back(TwoYears(fact, facts_[fact.next]));
        continue;
      }
      if (u < 0.2 && fact.place < 0) {
        const std::vector<size_t> &peers =
            by_indicator_year[{fact.indicator, fact.year}];
        size_t other = facts_.size();
        for (size_t p : peers) {
          if (p != f && remaining[p] > 0) {
            other = p;
            break;
          }
        }
        if (other < facts_.size()) {
          --remaining[other];
          plans.push_back(TwoEntities(fact, facts_[other]));
          continue;
        }
      }
      plans.push_back(Single(fact));
    }
    size_t notes = static_cast<size_t>(spec_.note_rate * plans.size());
    for (size_t i = 0; i < notes; ++i) plans.push_back(Note());
    rng_.Shuffle(plans);
    return plans;
  }

  void Assemble(std::vector<Plan> &plans, SyntheticCorpus &corpus) {
    const size_t per_doc = std::max<size_t>(1, spec_.sentences_per_doc);
    const size_t cap = per_doc + per_doc / 2;
    std::vector<std::vector<size_t>> docs((plans.size() + per_doc - 1) / per_doc);
    std::vector<std::set<std::string>> doc_facts(docs.size());
    for (size_t p = 0; p < plans.size(); ++p) {
      size_t start = docs.empty() ? 0 : rng_.Below(docs.size());
      size_t chosen = docs.size();
      for (size_t k = 0; k < docs.size(); ++k) {
        size_t d = (start + k) % docs.size();
        if (docs[d].size() >= cap) continue;
        bool clash = false;
        for (const std::string &f : plans[p].facts) clash |= doc_facts[d].count(f) > 0;
        if (!clash) {
          chosen = d;
          break;
        }
      }
      if (chosen == docs.size()) {
        docs.emplace_back();
        doc_facts.emplace_back();
      }
      docs[chosen].push_back(p);
      doc_facts[chosen].insert(plans[p].facts.begin(), plans[p].facts.end());
    }

    const QuantityExtractor extractor;
    char name[32];
    size_t doc_no = 0;
    for (const std::vector<size_t> &members : docs) {
      if (members.empty()) continue;
      std::snprintf(name, sizeof(name), "doc%04zu", ++doc_no);
      Document doc{name, ""};
      std::vector<std::pair<std::string, Plan *>> sentences;
      if (rng_.Chance(0.5)) sentences.push_back({kFillers[rng_.Below(std::size(kFillers))], nullptr});
      for (size_t p : members) {
        sentences.push_back({"", &plans[p]});
        if (rng_.Chance(0.15)) {
          sentences.push_back({kFillers[rng_.Below(std::size(kFillers))], nullptr});
        }
      }
      for (size_t s = 0; s < sentences.size(); ++s) {
        SyntheticSentence truth;
        truth.doc_id = doc.doc_id;
        truth.index = s;
        if (sentences[s].second == nullptr) {
          truth.text = sentences[s].first;
        } else {
          Builder::Built built = sentences[s].second->builder.Build(extractor);
          truth.text = built.text;
          truth.distractor = sentences[s].second->distractor;
          truth.mentions = std::move(built.mentions);
          for (LabeledExample &ex : built.examples) corpus.gold.push_back(std::move(ex));
        }
        if (!doc.text.empty()) doc.text += ' ';
        doc.text += truth.text;
        corpus.sentences.push_back(std::move(truth));
      }
      corpus.documents.push_back(std::move(doc));
    }
  }

  const SyntheticCorpusSpec spec_;
  Rng rng_;
  std::vector<std::string> entities_;
  std::vector<Fact> facts_;
};

}  // namespace

SyntheticCorpus GenerateSyntheticCorpus(const SyntheticCorpusSpec &spec) {
  if (spec.min_mentions < 1 || spec.max_mentions < spec.min_mentions ||
      spec.min_sig_digits < 1 || spec.max_sig_digits < spec.min_sig_digits ||
      spec.max_sig_digits > 15 || spec.distractor_rate < 0 ||
      spec.distractor_rate > 1) {
    throw Error(ErrorCode::kInvalidConfig, "inconsistent synthetic corpus spec");
  }
  return World(spec).Generate();
}

std::vector<LabeledExample> GenerateLabeledExamples(size_t count,
                                                    uint64_t seed) {
  SyntheticCorpusSpec spec;
  spec.seed = seed;
  spec.facts = std::max<size_t>(60, count / 3);
  spec.min_mentions = 1;
  spec.max_mentions = 2;
  std::vector<LabeledExample> gold = GenerateSyntheticCorpus(spec).gold;
  if (gold.size() > count) gold.resize(count);
  return gold;
}

void WriteSyntheticCorpus(const std::string &dir, const SyntheticCorpus &corpus,
                          const std::vector<LabeledExample> &labeled) {
  namespace fs = std::filesystem;
  using nlohmann::json;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "docs", ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create directory", dir, 0);
  for (const Document &doc : corpus.documents) {
    const std::string path = (fs::path(dir) / "docs" / (doc.doc_id + ".txt")).string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write file", path, 0);
    out << doc.text << '\n';
  }
  const std::string truth_path = (fs::path(dir) / "truth.jsonl").string();
  std::ofstream truth(truth_path, std::ios::binary | std::ios::trunc);
  if (!truth) throw Error(ErrorCode::kIoError, "cannot write file", truth_path, 0);
  for (const SyntheticSentence &s : corpus.sentences) {
    json mentions = json::array();
    for (const SyntheticMention &m : s.mentions) {
      mentions.push_back({{"surface", m.surface}, {"fact", m.fact_id}});
    }
    truth << json{{"doc_id", s.doc_id},
                  {"sentence", s.index},
                  {"distractor", s.distractor},
                  {"text", s.text},
                  {"mentions", mentions}}
                 .dump()
          << '\n';
  }
  SaveLabeledExamples((fs::path(dir) / "gold.jsonl").string(), corpus.gold);
  if (!labeled.empty()) {
    SaveLabeledExamples((fs::path(dir) / "labeled.jsonl").string(), labeled);
  }
  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  std::ofstream manifest(manifest_path, std::ios::binary | std::ios::trunc);
  manifest << json{{"facts", corpus.facts},
                   {"documents", corpus.documents.size()},
                   {"sentences", corpus.sentences.size()},
                   {"distractor_fraction", corpus.distractor_fraction}}
                  .dump(2)
           << '\n';
}

}  // namespace quantret
