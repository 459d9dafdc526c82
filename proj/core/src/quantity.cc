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

#include "quantret/quantity.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "quantret/error.h"

namespace quantret {
namespace {

std::string RegexEscape(char c) {
  static const std::string kSpecial = R"(\^$.|?*+()[]{}-)";
  std::string out;
  if (kSpecial.find(c) != std::string::npos) out += '\\';
  out += c;
  return out;
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path, path, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Calls fn(word, value, line_no) for every "word<TAB>value" line.
template <typename Fn>
void ForEachEntry(std::string_view content, const std::string &source,
                  Fn fn) {
  int line_no = 0;
  size_t pos = 0;
  while (pos <= content.size()) {
    size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') {
      if (nl == content.size()) break;
      continue;
    }
    size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 >= line.size()) {
      throw Error(ErrorCode::kParseError,
                  "expected \"word<TAB>value\" entry", source, line_no);
    }
    fn(line.substr(0, tab), line.substr(tab + 1), line_no);
    if (nl == content.size()) break;
  }
}

bool IsPercentUnit(std::string_view word) {
  return word == "%" || word == "\xEF\xBC\x85";  // "％"
}

}  // namespace

std::string_view KindName(QuantityKind kind) {
  switch (kind) {
    case QuantityKind::kCount: return "count";
    case QuantityKind::kCurrency: return "currency";
    case QuantityKind::kPercentage: return "percentage";
    case QuantityKind::kOther: return "other";
  }
  return "other";
}

QuantityKind ParseKind(std::string_view name) {
  if (name == "count") return QuantityKind::kCount;
  if (name == "currency") return QuantityKind::kCurrency;
  if (name == "percentage") return QuantityKind::kPercentage;
  if (name == "other") return QuantityKind::kOther;
  throw Error(ErrorCode::kParseError,
              "unknown quantity kind \"" + std::string(name) + "\"");
}

// --- MagnitudeLexicon -----------------------------------------------------

MagnitudeLexicon MagnitudeLexicon::Default() {
  MagnitudeLexicon lexicon;
  lexicon.Add("hundred", 2);
  lexicon.Add("thousand", 3);
  lexicon.Add("million", 6);
  lexicon.Add("billion", 9);
  lexicon.Add("trillion", 12);
  lexicon.Add("\xE4\xB8\x87", 4);  // 万
  lexicon.Add("\xE4\xBA\xBF", 8);  // 亿
  return lexicon;
}

MagnitudeLexicon MagnitudeLexicon::LoadFile(const std::string &path) {
  return Parse(ReadFile(path), path);
}

MagnitudeLexicon MagnitudeLexicon::Parse(std::string_view content,
                                         const std::string &source) {
  MagnitudeLexicon lexicon;
  ForEachEntry(content, source,
               [&](std::string_view word, std::string_view value, int line) {
                 int power = -1;
                 auto [ptr, ec] = std::from_chars(
                     value.data(), value.data() + value.size(), power);
                 if (ec != std::errc() || ptr != value.data() + value.size() ||
                     power < 0) {
                   throw Error(ErrorCode::kParseError,
                               "power must be a non-negative integer", source,
                               line);
                 }
                 lexicon.Add(word, power);
               });
  return lexicon;
}

void MagnitudeLexicon::Add(std::string_view word, int power) {
  if (power < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative magnitude power");
  }
  entries_[AsciiLower(word)] = power;
}

std::optional<int> MagnitudeLexicon::Lookup(std::string_view word) const {
  auto it = entries_.find(AsciiLower(word));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::pair<int, std::string>> MagnitudeLexicon::WordAbove(
    int exponent) const {
  std::optional<std::pair<int, std::string>> best;
  for (const auto &[word, power] : entries_) {
    if (power <= exponent) continue;
    if (!best || power < best->first) best.emplace(power, word);
  }
  return best;
}

// --- UnitLexicon ----------------------------------------------------------

UnitLexicon UnitLexicon::Default() {
  UnitLexicon lexicon;
  for (const char *w : {"yuan", "rmb", "cny", "dollar", "dollars", "usd",
                        "euro", "euros", "eur", "\xE5\x85\x83" /* 元 */}) {
    lexicon.Add(w, QuantityKind::kCurrency);
  }
  for (const char *w :
       {"units", "unit", "people", "persons", "employees", "vehicles", "cars",
        "tons", "tonnes", "households", "enterprises", "projects", "shares",
        "stores", "customers", "sets", "pieces", "\xE4\xBA\xBA" /* 人 */,
        "\xE5\xAE\xB6" /* 家 */, "\xE8\xBE\x86" /* 辆 */,
        "\xE5\x90\xA8" /* 吨 */}) {
    lexicon.Add(w, QuantityKind::kCount);
  }
  lexicon.Add("%", QuantityKind::kPercentage);
  lexicon.Add("\xEF\xBC\x85", QuantityKind::kPercentage);
  lexicon.Add("percent", QuantityKind::kPercentage);
  return lexicon;
}

UnitLexicon UnitLexicon::LoadFile(const std::string &path) {
  return Parse(ReadFile(path), path);
}

UnitLexicon UnitLexicon::Parse(std::string_view content,
                               const std::string &source) {
  UnitLexicon lexicon;
  ForEachEntry(content, source,
               [&](std::string_view word, std::string_view value, int line) {
                 try {
                   lexicon.Add(word, ParseKind(value));
                 } catch (const Error &e) {
                   throw Error(ErrorCode::kParseError, e.what(), source, line);
                 }
               });
  return lexicon;
}

void UnitLexicon::Add(std::string_view word, QuantityKind kind) {
  entries_[AsciiLower(word)] = kind;
}

std::optional<QuantityKind> UnitLexicon::Lookup(std::string_view word) const {
  auto it = entries_.find(AsciiLower(word));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

// --- NormalizedValue ------------------------------------------------------

double NormalizedValue::ToDouble() const {
  double v = std::stod(mantissa_digits) * std::pow(10.0, exponent);
  return negative ? -v : v;
}

std::string NormalizedValue::DecimalString() const {
  std::string out = negative ? "-" : "";
  const std::string &m = mantissa_digits;
  if (exponent >= 0) {
    out += m;
    if (!is_zero()) out.append(static_cast<size_t>(exponent), '0');
    return out;
  }
  int point = static_cast<int>(m.size()) + exponent;
  if (point > 0) {
    out += m.substr(0, point) + "." + m.substr(point);
  } else {
    out += "0." + std::string(static_cast<size_t>(-point), '0') + m;
  }
  return out;
}

std::string RoundSignificant(std::string_view digits, int places,
                             int &exponent) {
  if (places <= 0 || static_cast<size_t>(places) >= digits.size()) {
    return std::string(digits);
  }
  std::string kept(digits.substr(0, places));
  bool round_up = digits[places] >= '5';
  exponent += static_cast<int>(digits.size()) - places;
  if (!round_up) return kept;
  int i = places - 1;
  while (i >= 0 && kept[i] == '9') {
    kept[i] = '0';
    --i;
  }
  if (i >= 0) {
    ++kept[i];
    return kept;
  }
  // All nines: 99 -> 100, keep `places` digits.
  kept.insert(kept.begin(), '1');
  kept.pop_back();
  exponent += 1;
  return kept;
}

bool SameValue(const NormalizedValue &a, const NormalizedValue &b) {
  bool pa = a.kind == QuantityKind::kPercentage;
  bool pb = b.kind == QuantityKind::kPercentage;
  if (pa != pb) return false;
  if (a.is_zero() || b.is_zero()) return a.is_zero() && b.is_zero();
  if (a.negative != b.negative) return false;
  int places = std::min(a.sig_digits, b.sig_digits);
  int ea = a.exponent;
  int eb = b.exponent;
  std::string ra = RoundSignificant(a.mantissa_digits, places, ea);
  std::string rb = RoundSignificant(b.mantissa_digits, places, eb);
  return ra == rb && ea == eb;
}

// --- QuantityExtractor ----------------------------------------------------

QuantityExtractor::QuantityExtractor()
    : QuantityExtractor(MagnitudeLexicon::Default(), UnitLexicon::Default()) {}

QuantityExtractor::QuantityExtractor(MagnitudeLexicon magnitudes,
                                     UnitLexicon units, NumberFormat format)
    : magnitudes_(std::move(magnitudes)),
      units_(std::move(units)),
      format_(format) {
  if (format_.thousands_separator == format_.decimal_mark) {
    throw Error(ErrorCode::kInvalidConfig,
                "thousands separator and decimal mark must differ");
  }
  std::string sep = RegexEscape(format_.thousands_separator);
  std::string dec = RegexEscape(format_.decimal_mark);
  std::string pattern = "([+-]?)(\\d{1,3}(?:" + sep + "\\d{3})+|\\d+)(?:" +
                        dec + "(\\d+))?(%|\xEF\xBC\x85)?";
  number_regex_ = std::regex(pattern, std::regex::ECMAScript |
                                          std::regex::optimize);
}

std::optional<QuantityExtractor::ParsedNumber> QuantityExtractor::MatchNumber(
    std::string_view token) const {
  if (token.empty()) return std::nullopt;
  // Cheap reject before the regex: must contain a digit.
  if (std::none_of(token.begin(), token.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(token.begin(), token.end(), m, number_regex_)) {
    return std::nullopt;
  }
  ParsedNumber number;
  number.negative = m[1].str() == "-";
  number.has_sign = m[1].length() > 0;
  std::string integer = m[2].str();
  number.has_separator =
      integer.find(format_.thousands_separator) != std::string::npos;
  integer.erase(
      std::remove(integer.begin(), integer.end(), format_.thousands_separator),
      integer.end());
  number.integer_digits = std::move(integer);
  number.fraction_digits = m[3].matched ? m[3].str() : "";
  number.percent = m[4].matched;
  return number;
}

bool QuantityExtractor::IsYear(const ParsedNumber &n) const {
  if (!format_.exclude_years || n.has_sign || n.percent || n.has_separator ||
      !n.fraction_digits.empty() || n.integer_digits.size() != 4) {
    return false;
  }
  int year = std::stoi(n.integer_digits);
  return year >= format_.year_min && year <= format_.year_max;
}

std::vector<RawQuantity> QuantityExtractor::Extract(
    std::span<const Token> tokens) const {
  std::vector<RawQuantity> out;
  size_t i = 0;
  while (i < tokens.size()) {
    auto number = MatchNumber(tokens[i].text);
    if (!number) {
      ++i;
      continue;
    }
    size_t end = i + 1;
    bool bare = true;
    if (!number->percent) {
      if (end < tokens.size() && magnitudes_.Lookup(tokens[end].text)) {
        ++end;
        bare = false;
      }
      if (end < tokens.size() && units_.Lookup(tokens[end].text)) {
        ++end;
        bare = false;
      }
    }
    if (bare && IsYear(*number)) {
      ++i;
      continue;
    }
    out.push_back({i, end, JoinTokens(tokens, i, end)});
    i = end;
  }
  return out;
}

NormalizedValue QuantityExtractor::Normalize(std::string_view surface) const {
  std::vector<std::string> words = TokenizeWords(surface);
  const auto malformed = [&](const std::string &why) {
    return Error(ErrorCode::kMalformedSurface,
                 "\"" + std::string(surface) + "\": " + why);
  };
  if (words.empty()) throw malformed("empty surface");
  auto number = MatchNumber(words[0]);
  if (!number) throw malformed("no number");
  size_t next = 1;
  int magnitude = 0;
  NormalizedValue value;
  if (number->percent) {
    value.kind = QuantityKind::kPercentage;
    value.unit_tag = "%";
  } else {
    if (next < words.size()) {
      if (auto power = magnitudes_.Lookup(words[next])) {
        magnitude = *power;
        ++next;
      }
    }
    if (next < words.size()) {
      if (auto kind = units_.Lookup(words[next])) {
        value.kind = *kind;
        value.unit_tag = IsPercentUnit(words[next]) ? std::string("%")
                                                    : AsciiLower(words[next]);
        ++next;
      }
    }
  }
  if (next != words.size()) throw malformed("trailing text");

  std::string digits = number->integer_digits + number->fraction_digits;
  size_t first = digits.find_first_not_of('0');
  if (first == std::string::npos) {
    value.negative = false;
    value.mantissa_digits = "0";
    value.exponent = 0;
    value.sig_digits = 1;
    return value;
  }
  int exponent = magnitude - static_cast<int>(number->fraction_digits.size());
  std::string mantissa = digits.substr(first);
  if (number->fraction_digits.empty()) {
    // Trailing zeros of a plain integer are not significant.
    while (mantissa.size() > 1 && mantissa.back() == '0') {
      mantissa.pop_back();
      ++exponent;
    }
  }
  value.negative = number->negative;
  value.mantissa_digits = std::move(mantissa);
  value.exponent = exponent;
  value.sig_digits = static_cast<int>(value.mantissa_digits.size());
  return value;
}

std::string QuantityExtractor::Render(const NormalizedValue &value) const {
  std::string number;
  bool trailing_zero = !value.is_zero() &&
                       value.mantissa_digits.back() == '0';
  if (value.exponent >= 0 && trailing_zero) {
    // Zeros after a decimal point keep their significance: "1.20 thousand".
    auto above = magnitudes_.WordAbove(value.exponent);
    if (!above) {
      throw Error(ErrorCode::kUnsupported,
                  "no magnitude word can carry this precision");
    }
    NormalizedValue scaled = value;
    scaled.exponent = value.exponent - above->first;
    number = scaled.DecimalString() + " " + above->second;
  } else {
    number = value.DecimalString();
  }
  if (value.unit_tag) {
    if (*value.unit_tag == "%") {
      number += number.find(' ') != std::string::npos ? " %" : "%";
    } else {
      number += " " + *value.unit_tag;
    }
  }
  return number;
}

std::vector<RawQuantity> ExtractQuantities(std::span<const Token> tokens,
                                           const MagnitudeLexicon &lexicon) {
  return QuantityExtractor(lexicon, UnitLexicon::Default()).Extract(tokens);
}

NormalizedValue NormalizeValue(std::string_view surface,
                               const MagnitudeLexicon &lexicon) {
  return QuantityExtractor(lexicon, UnitLexicon::Default()).Normalize(surface);
}

}  // namespace quantret
