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

#ifndef QUANTRET_TEXT_H_
#define QUANTRET_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace quantret {

// A word of a tokenized sentence. Indices are 0-based and contiguous.
struct Token {
  std::string text;
  size_t index = 0;

  bool operator==(const Token &other) const = default;
};

std::vector<Token> MakeTokens(const std::vector<std::string> &words);

// Decodes one UTF-8 code point starting at `pos`, advancing `pos`. Invalid
// bytes decode as U+FFFD and advance by one.
char32_t DecodeUtf8(std::string_view text, size_t &pos);
void AppendUtf8(char32_t cp, std::string &out);

// CJK ideographs, kana, hangul and full-width forms.
bool IsCjk(char32_t cp);
bool IsCjkPunctuation(char32_t cp);

std::string AsciiLower(std::string_view text);

// Splits a sentence into word tokens: whitespace separates words, CJK
// characters are single tokens, and leading/trailing punctuation is peeled
// off as separate tokens. Interior punctuation ("47,412", "1.23", "U.S")
// stays attached. Tokens re-tokenize to themselves.
std::vector<std::string> TokenizeWords(std::string_view text);

// Splits text into sentences. Multi-byte terminators ("。") always end a
// sentence; ASCII terminators end one only when followed by whitespace or
// end of text, so "1.23" is never split. Terminators stay with the sentence.
std::vector<std::string> SplitSentences(
    std::string_view text, const std::vector<std::string> &terminators);
const std::vector<std::string> &DefaultSentenceTerminators();

// Tokens [begin, end) joined with single spaces.
std::string JoinTokens(std::span<const Token> tokens, size_t begin,
                       size_t end);
std::string JoinTokens(std::span<const Token> tokens);

uint64_t Fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace quantret

#endif  // QUANTRET_TEXT_H_
