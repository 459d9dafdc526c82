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

#ifndef QUANTRET_QUANTITY_H_
#define QUANTRET_QUANTITY_H_

#include <map>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quantret/text.h"

namespace quantret {

enum class QuantityKind { kCount, kCurrency, kPercentage, kOther };

std::string_view KindName(QuantityKind kind);
QuantityKind ParseKind(std::string_view name);

// Magnitude words ("thousand", "million", "万") mapped to powers of ten.
// Lookup is case-insensitive.
class MagnitudeLexicon {
 public:
  MagnitudeLexicon() = default;

  static MagnitudeLexicon Default();
  // One "word<TAB>power" entry per line; '#' starts a comment line.
  static MagnitudeLexicon LoadFile(const std::string &path);
  static MagnitudeLexicon Parse(std::string_view content,
                                const std::string &source = "<string>");

  void Add(std::string_view word, int power);
  std::optional<int> Lookup(std::string_view word) const;

  // Smallest power strictly greater than `exponent`, with its word.
  std::optional<std::pair<int, std::string>> WordAbove(int exponent) const;

  const std::map<std::string, int> &entries() const { return entries_; }

 private:
  std::map<std::string, int> entries_;
};

// Unit words and the quantity kind they imply ("yuan" -> currency,
// "%" -> percentage). Same file format, "word<TAB>kind".
class UnitLexicon {
 public:
  UnitLexicon() = default;

  static UnitLexicon Default();
  static UnitLexicon LoadFile(const std::string &path);
  static UnitLexicon Parse(std::string_view content,
                           const std::string &source = "<string>");

  void Add(std::string_view word, QuantityKind kind);
  std::optional<QuantityKind> Lookup(std::string_view word) const;

 private:
  std::map<std::string, QuantityKind> entries_;
};

struct NumberFormat {
  char thousands_separator = ',';
  char decimal_mark = '.';
  // Bare 4-digit integers in [year_min, year_max] are years, not quantities.
  bool exclude_years = true;
  int year_min = 1900;
  int year_max = 2100;
};

// A quantity mention: half-open token span plus its verbatim surface.
struct RawQuantity {
  size_t begin = 0;
  size_t end = 0;
  std::string surface;

  bool operator==(const RawQuantity &other) const = default;
};

// Canonical decimal value: (-1)^negative * mantissa_digits * 10^exponent.
// mantissa_digits holds exactly the written significant digits, so
// sig_digits == mantissa_digits.size(). Zero is {"0", 0, 1}.
struct NormalizedValue {
  bool negative = false;
  std::string mantissa_digits = "0";
  int exponent = 0;
  int sig_digits = 1;
  QuantityKind kind = QuantityKind::kOther;
  std::optional<std::string> unit_tag;

  bool is_zero() const { return mantissa_digits == "0"; }
  double ToDouble() const;
  // Plain decimal rendering without unit, e.g. "1230000" or "0.046".
  std::string DecimalString() const;

  bool operator==(const NormalizedValue &other) const = default;
};

// Rounds `digits` (no leading zero) to `places` significant digits, half
// away from zero. Returns the rounded digit string and adjusts `exponent`.
std::string RoundSignificant(std::string_view digits, int places,
                             int &exponent);

// True iff the kinds are compatible (percentages only match percentages)
// and the values agree after rounding the more precise one to the other's
// significant digits.
bool SameValue(const NormalizedValue &a, const NormalizedValue &b);

class QuantityExtractor {
 public:
  QuantityExtractor();
  QuantityExtractor(MagnitudeLexicon magnitudes, UnitLexicon units,
                    NumberFormat format = {});

  // All maximal, non-overlapping quantity spans, sorted by start.
  std::vector<RawQuantity> Extract(std::span<const Token> tokens) const;

  // Throws Error(kMalformedSurface) if `surface` is not a quantity.
  NormalizedValue Normalize(std::string_view surface) const;

  // Canonical surface which normalizes back to `value`.
  std::string Render(const NormalizedValue &value) const;

  const MagnitudeLexicon &magnitudes() const { return magnitudes_; }
  const UnitLexicon &units() const { return units_; }
  const NumberFormat &format() const { return format_; }

 private:
  struct ParsedNumber {
    bool negative = false;
    bool has_sign = false;
    std::string integer_digits;
    std::string fraction_digits;
    bool percent = false;
    bool has_separator = false;
  };

  std::optional<ParsedNumber> MatchNumber(std::string_view token) const;
  bool IsYear(const ParsedNumber &number) const;

  MagnitudeLexicon magnitudes_;
  UnitLexicon units_;
  NumberFormat format_;
  std::regex number_regex_;
};

std::vector<RawQuantity> ExtractQuantities(std::span<const Token> tokens,
                                           const MagnitudeLexicon &lexicon);
NormalizedValue NormalizeValue(std::string_view surface,
                               const MagnitudeLexicon &lexicon);

}  // namespace quantret

#endif  // QUANTRET_QUANTITY_H_
