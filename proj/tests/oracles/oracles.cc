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

#include "oracles/oracles.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/multiprecision/cpp_int.hpp>

namespace quantret::oracle {
namespace {

using boost::multiprecision::cpp_int;

bool IsDigit(char c) { return c >= '0' && c <= '9'; }

struct WalkedNumber {
  bool ok = false;
  bool percent = false;
  bool year_like = false;
};

WalkedNumber WalkNumber(const std::string &t) {
  WalkedNumber out;
  size_t i = 0;
  bool signed_number = false;
  if (i < t.size() && (t[i] == '+' || t[i] == '-')) {
    signed_number = true;
    ++i;
  }
  size_t lead = 0;
  while (i < t.size() && IsDigit(t[i])) {
    ++i;
    ++lead;
  }
  if (lead == 0) return out;
  bool grouped = false;
  while (lead <= 3 && i + 3 < t.size() + 0 && t[i] == ',' && IsDigit(t[i + 1]) &&
         IsDigit(t[i + 2]) && IsDigit(t[i + 3]) &&
         (i + 4 == t.size() || !IsDigit(t[i + 4]))) {
    grouped = true;
    i += 4;
  }
  bool fraction = false;
  if (i + 1 < t.size() && t[i] == '.' && IsDigit(t[i + 1])) {
    fraction = true;
    ++i;
    while (i < t.size() && IsDigit(t[i])) ++i;
  }
  if (i < t.size() && t[i] == '%') {
    out.percent = true;
    ++i;
  } else if (t.compare(i, std::string::npos, "\xEF\xBC\x85") == 0) {
    out.percent = true;
    i += 3;
  }
  if (i != t.size()) return out;
  out.ok = true;
  if (!signed_number && !grouped && !fraction && !out.percent && lead == 4) {
    int year = std::stoi(t);
    out.year_like = year >= 1900 && year <= 2100;
  }
  return out;
}

// value = digits * 10^exponent, rounded to `places` digits, as
// (integer, exponent).
std::pair<cpp_int, int> RoundTo(const std::string &digits, int exponent, int places) {
  cpp_int m(digits);
  int drop = static_cast<int>(digits.size()) - places;
  if (drop <= 0) return {m, exponent};
  cpp_int scale = 1;
  for (int i = 0; i < drop; ++i) scale *= 10;
  cpp_int q = m / scale;
  cpp_int r = m % scale;
  if (r * 2 >= scale) q += 1;
  return {q, exponent + drop};
}

cpp_int Shift(cpp_int v, int by) {
  for (int i = 0; i < by; ++i) v *= 10;
  return v;
}

bool Partial(const Segment &a, const Segment &b) {
  size_t lo = std::max(a.begin, b.begin);
  size_t hi = std::min(a.end, b.end);
  size_t inter = hi > lo ? hi - lo : 0;
  size_t uni = (a.end - a.begin) + (b.end - b.begin) - inter;
  return 3 * inter > uni;
}

bool SegmentsEqual(const Segment &a, const Segment &b) {
  return a.begin == b.begin && a.end == b.end;
}

bool AnyMatch(const Segment &s, const std::vector<Segment> &others, bool partial) {
  for (const Segment &o : others) {
    if (partial ? Partial(s, o) : SegmentsEqual(s, o)) return true;
  }
  return false;
}

bool AssignmentExists(const std::vector<Segment> &p, const std::vector<Segment> &g,
                      size_t row, uint32_t used) {
  if (row == p.size()) return true;
  for (size_t c = 0; c < g.size(); ++c) {
    if ((used >> c) & 1u) continue;
    if (!Partial(p[row], g[c])) continue;
    if (AssignmentExists(p, g, row + 1, used | (1u << c))) return true;
  }
  return false;
}

std::vector<std::string> SplitSpaces(const std::string &s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

std::vector<RawQuantity> WalkExtract(const std::vector<Token> &tokens,
                                     const MagnitudeLexicon &magnitudes,
                                     const UnitLexicon &units) {
  std::vector<RawQuantity> out;
  for (size_t i = 0; i < tokens.size();) {
    WalkedNumber n = WalkNumber(tokens[i].text);
    if (!n.ok) {
      ++i;
      continue;
    }
    size_t end = i + 1;
    if (!n.percent) {
      if (end < tokens.size() && magnitudes.Lookup(tokens[end].text)) ++end;
      if (end < tokens.size() && units.Lookup(tokens[end].text)) ++end;
    }
    if (end == i + 1 && n.year_like) {
      ++i;
      continue;
    }
    RawQuantity q;
    q.begin = i;
    q.end = end;
    for (size_t t = i; t < end; ++t) {
      if (t > i) q.surface += ' ';
      q.surface += tokens[t].text;
    }
    out.push_back(q);
    i = end;
  }
  return out;
}

bool DecimalSameValue(const NormalizedValue &a, const NormalizedValue &b) {
  if ((a.kind == QuantityKind::kPercentage) != (b.kind == QuantityKind::kPercentage)) {
    return false;
  }
  const bool za = a.mantissa_digits == "0";
  const bool zb = b.mantissa_digits == "0";
  if (za || zb) return za && zb;
  if (a.negative != b.negative) return false;
  int places = std::min<int>(a.mantissa_digits.size(), b.mantissa_digits.size());
  auto [ma, ea] = RoundTo(a.mantissa_digits, a.exponent, places);
  auto [mb, eb] = RoundTo(b.mantissa_digits, b.exponent, places);
  int base = std::min(ea, eb);
  return Shift(ma, ea - base) == Shift(mb, eb - base);
}

double NaiveExist(const std::vector<int> &labels, size_t n) {
  for (size_t i = 0; i < labels.size() && i < n; ++i) {
    if (labels[i] == 1) return 1;
  }
  return 0;
}

double NaiveAp(const std::vector<int> &labels, size_t n) {
  std::vector<int> top(labels.begin(), labels.begin() + std::min(n, labels.size()));
  double numerator = 0;
  double denominator = 0;
  for (size_t i = 1; i <= top.size(); ++i) {
    double relevant_so_far = 0;
    for (size_t j = 0; j < i; ++j) relevant_so_far += top[j];
    double precision_at_i = relevant_so_far / static_cast<double>(i);
    numerator += precision_at_i * top[i - 1];
    denominator += top[i - 1];
  }
  return denominator == 0 ? 0 : numerator / denominator;
}

double NaiveNdcg(const std::vector<int> &labels, size_t pool_relevant, size_t n) {
  double dcg = 0;
  for (size_t i = 1; i <= labels.size() && i <= n; ++i) {
    dcg += labels[i - 1] / (std::log(static_cast<double>(i) + 1) / std::log(2.0));
  }
  double idcg = 0;
  for (size_t i = 1; i <= std::min(pool_relevant, n); ++i) {
    idcg += 1 / (std::log(static_cast<double>(i) + 1) / std::log(2.0));
  }
  return idcg == 0 ? 0 : dcg / idcg;
}

NaivePrf NaiveSegmentPrf(const std::vector<Description> &predicted,
                         const std::vector<Description> &gold, bool partial) {
  double pred_total = 0, pred_ok = 0, gold_total = 0, gold_ok = 0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    for (const Segment &s : predicted[i].segments) {
      pred_total += 1;
      pred_ok += AnyMatch(s, gold[i].segments, partial);
    }
    for (const Segment &s : gold[i].segments) {
      gold_total += 1;
      gold_ok += AnyMatch(s, predicted[i].segments, partial);
    }
  }
  NaivePrf out;
  if (pred_total == 0 && gold_total == 0) return {1, 1, 1};
  out.precision = pred_total == 0 ? 0 : pred_ok / pred_total;
  out.recall = gold_total == 0 ? 0 : gold_ok / gold_total;
  out.f1 = out.precision + out.recall == 0
               ? 0
               : 2 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

double NaiveQuantityAccuracy(const std::vector<Description> &predicted,
                             const std::vector<Description> &gold, bool partial) {
  if (predicted.empty()) return 0;
  double hits = 0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    const std::vector<Segment> &p = predicted[i].segments;
    const std::vector<Segment> &g = gold[i].segments;
    bool match;
    if (!partial) {
      std::set<std::pair<size_t, size_t>> a, b;
      for (const Segment &s : p) a.insert({s.begin, s.end});
      for (const Segment &s : g) b.insert({s.begin, s.end});
      match = a == b && a.size() == p.size() && b.size() == g.size();
    } else {
      match = p.size() == g.size() && AssignmentExists(p, g, 0, 0);
    }
    hits += match;
  }
  return hits / static_cast<double>(predicted.size());
}

std::vector<OracleHit> FullScanBm25(const std::vector<std::vector<std::string>> &docs,
                                    const std::vector<std::string> &query,
                                    double k1, double b) {
  const double n = static_cast<double>(docs.size());
  double total = 0;
  for (const auto &d : docs) total += static_cast<double>(d.size());
  double avgdl = n == 0 ? 1 : total / n;
  if (avgdl == 0) avgdl = 1;
  std::vector<OracleHit> hits;
  for (size_t r = 0; r < docs.size(); ++r) {
    const auto &d = docs[r];
    double score = 0;
    bool shares = false;
    for (const std::string &term : query) {
      double tf = static_cast<double>(std::count(d.begin(), d.end(), term));
      if (tf == 0) continue;
      shares = true;
      double df = 0;
      for (const auto &other : docs) {
        df += std::find(other.begin(), other.end(), term) != other.end();
      }
      double idf = std::max(0.0, std::log((n - df + 0.5) / (df + 0.5)));
      double len = static_cast<double>(d.size());
      score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avgdl));
    }
    if (shares) hits.push_back({r, score});
  }
  std::sort(hits.begin(), hits.end(), [](const OracleHit &x, const OracleHit &y) {
    if (x.score != y.score) return x.score > y.score;
    return x.ref < y.ref;
  });
  return hits;
}

std::map<std::pair<size_t, size_t>, OraclePair> ExhaustiveMine(
    const std::vector<std::vector<std::string>> &docs,
    const std::vector<NormalizedValue> &values, size_t k, double k1, double b) {
  // Scores of every (i, j) and i's top-k set with i itself removed.
  std::vector<std::vector<std::pair<size_t, double>>> top(docs.size());
  for (size_t i = 0; i < docs.size(); ++i) {
    std::vector<OracleHit> ranking = FullScanBm25(docs, docs[i], k1, b);
    for (const OracleHit &h : ranking) {
      if (h.ref == i) continue;
      if (top[i].size() == k) break;
      top[i].push_back({h.ref, h.score});
    }
  }
  std::map<std::pair<size_t, size_t>, OraclePair> out;
  for (size_t i = 0; i < docs.size(); ++i) {
    for (size_t j = 0; j < docs.size(); ++j) {
      if (i == j) continue;
      for (const auto &[ref, score] : top[i]) {
        if (ref != j) continue;
        auto key = std::make_pair(std::min(i, j), std::max(i, j));
        auto it = out.find(key);
        if (it == out.end()) {
          out[key] = {score, DecimalSameValue(values[i], values[j])};
        } else {
          it->second.score = std::max(it->second.score, score);
        }
      }
    }
  }
  return out;
}

std::vector<std::pair<std::string, double>> CosineScan(
    const std::vector<std::string> &ids, const std::vector<std::vector<double>> &vectors,
    const std::vector<double> &query, size_t k) {
  double qq = 0;
  for (double x : query) qq += x * x;
  std::vector<std::pair<std::string, double>> all;
  if (qq == 0) return all;
  for (size_t r = 0; r < ids.size(); ++r) {
    double dd = 0, dot = 0;
    for (size_t c = 0; c < query.size(); ++c) {
      dd += vectors[r][c] * vectors[r][c];
      dot += vectors[r][c] * query[c];
    }
    if (dd == 0) continue;
    all.push_back({ids[r], dot / (std::sqrt(qq) * std::sqrt(dd))});
  }
  std::sort(all.begin(), all.end(), [](const auto &x, const auto &y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

TagSequence RandomValidTags(std::mt19937_64 &rng, size_t length) {
  TagSequence tags;
  size_t i = 0;
  while (i < length) {
    if (rng() % 3 != 0) {
      tags.push_back(Tag::kO);
      ++i;
      continue;
    }
    size_t span = 1 + rng() % std::min<size_t>(4, length - i);
    tags.push_back(Tag::kB);
    for (size_t j = 1; j + 1 < span; ++j) tags.push_back(Tag::kI);
    if (span > 1) tags.push_back(Tag::kE);
    i += span;
  }
  return tags;
}

std::vector<Segment> RandomSegments(std::mt19937_64 &rng, size_t length, size_t max_count) {
  std::vector<Segment> out;
  size_t count = max_count == 0 ? 0 : rng() % (max_count + 1);
  size_t pos = 0;
  for (size_t s = 0; s < count && pos < length; ++s) {
    size_t begin = pos + rng() % std::max<size_t>(1, std::min<size_t>(3, length - pos));
    if (begin >= length) break;
    size_t end = begin + 1 + rng() % std::min<size_t>(4, length - begin);
    out.push_back({begin, end});
    pos = end;
  }
  return out;
}

NormalizedValue RandomValue(std::mt19937_64 &rng, int max_sig, bool allow_percent) {
  NormalizedValue v;
  int sig = 1 + static_cast<int>(rng() % static_cast<uint64_t>(max_sig));
  std::string digits(1, static_cast<char>('1' + rng() % 9));
  for (int i = 1; i < sig; ++i) digits += static_cast<char>('0' + rng() % 10);
  if (rng() % 50 == 0) digits = "0";
  v.mantissa_digits = digits;
  v.sig_digits = static_cast<int>(digits.size());
  v.exponent = digits == "0" ? 0 : static_cast<int>(rng() % 9) - 4;
  v.negative = digits != "0" && rng() % 8 == 0;
  v.kind = allow_percent && rng() % 4 == 0 ? QuantityKind::kPercentage
                                          : QuantityKind::kOther;
  return v;
}

}  // namespace quantret::oracle
