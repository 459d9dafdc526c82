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

#include "quantret/text.h"

#include <algorithm>

namespace quantret {
namespace {

bool IsSpace(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' ||
         cp == '\v' || cp == 0x3000 || cp == 0xA0;
}

// Punctuation peeled from word edges. '%' and currency signs stay attached.
bool IsEdgePunctuation(char32_t cp) {
  switch (cp) {
    case ',': case '.': case ';': case ':': case '!': case '?':
    case '(': case ')': case '[': case ']': case '{': case '}':
    case '"': case '\'':
      return true;
    default:
      return IsCjkPunctuation(cp);
  }
}

}  // namespace

std::vector<Token> MakeTokens(const std::vector<std::string> &words) {
  std::vector<Token> tokens;
  tokens.reserve(words.size());
  for (size_t i = 0; i < words.size(); ++i) tokens.push_back({words[i], i});
  return tokens;
}

char32_t DecodeUtf8(std::string_view text, size_t &pos) {
  const auto byte = [&](size_t i) {
    return static_cast<unsigned char>(text[i]);
  };
  unsigned char c = byte(pos);
  if (c < 0x80) {
    ++pos;
    return c;
  }
  int extra = 0;
  char32_t cp = 0;
  if ((c & 0xE0) == 0xC0) {
    extra = 1;
    cp = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    extra = 2;
    cp = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    extra = 3;
    cp = c & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  if (pos + extra >= text.size()) {
    ++pos;
    return 0xFFFD;
  }
  for (int i = 1; i <= extra; ++i) {
    unsigned char cc = byte(pos + i);
    if ((cc & 0xC0) != 0x80) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | (cc & 0x3F);
  }
  pos += extra + 1;
  return cp;
}

void AppendUtf8(char32_t cp, std::string &out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool IsCjkPunctuation(char32_t cp) {
  return (cp >= 0x3000 && cp <= 0x303F && cp != 0x3000) ||
         (cp >= 0xFF01 && cp <= 0xFF0F && cp != 0xFF05) ||
         (cp >= 0xFF1A && cp <= 0xFF1F) || cp == 0x2014 || cp == 0x2026 ||
         cp == 0x201C || cp == 0x201D || cp == 0x2018 || cp == 0x2019;
}

bool IsCjk(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
         (cp >= 0x3040 && cp <= 0x30FF) || (cp >= 0xAC00 && cp <= 0xD7AF) ||
         (cp >= 0xF900 && cp <= 0xFAFF) || (cp >= 0x20000 && cp <= 0x2FA1F);
}

std::string AsciiLower(std::string_view text) {
  std::string out(text);
  for (char &c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> TokenizeWords(std::string_view text) {
  // Pass 1: split into chunks on whitespace; CJK characters and CJK
  // punctuation become standalone chunks.
  std::vector<std::string> chunks;
  std::string current;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t start = pos;
    char32_t cp = DecodeUtf8(text, pos);
    if (IsSpace(cp)) {
      if (!current.empty()) chunks.push_back(std::move(current));
      current.clear();
    } else if (IsCjk(cp) || IsCjkPunctuation(cp)) {
      if (!current.empty()) chunks.push_back(std::move(current));
      current.clear();
      chunks.emplace_back(text.substr(start, pos - start));
    } else {
      current.append(text.substr(start, pos - start));
    }
  }
  if (!current.empty()) chunks.push_back(std::move(current));

  // Pass 2: peel edge punctuation, one character per token.
  std::vector<std::string> tokens;
  for (const std::string &chunk : chunks) {
    std::vector<std::pair<size_t, size_t>> cps;  // byte offset, length
    for (size_t p = 0; p < chunk.size();) {
      size_t s = p;
      DecodeUtf8(chunk, p);
      cps.emplace_back(s, p - s);
    }
    const auto cp_at = [&](size_t i) {
      size_t p = cps[i].first;
      return DecodeUtf8(chunk, p);
    };
    size_t lo = 0, hi = cps.size();
    std::vector<std::string> trailing;
    while (lo < hi && IsEdgePunctuation(cp_at(lo))) {
      tokens.push_back(chunk.substr(cps[lo].first, cps[lo].second));
      ++lo;
    }
    while (hi > lo && IsEdgePunctuation(cp_at(hi - 1))) {
      trailing.push_back(chunk.substr(cps[hi - 1].first, cps[hi - 1].second));
      --hi;
    }
    if (lo < hi) {
      size_t b = cps[lo].first;
      size_t e = cps[hi - 1].first + cps[hi - 1].second;
      tokens.push_back(chunk.substr(b, e - b));
    }
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) {
      tokens.push_back(std::move(*it));
    }
  }
  return tokens;
}

const std::vector<std::string> &DefaultSentenceTerminators() {
  static const std::vector<std::string> kTerminators = {"。", ".", "!",
                                                        "?"};
  return kTerminators;
}

std::vector<std::string> SplitSentences(
    std::string_view text, const std::vector<std::string> &terminators) {
  std::vector<std::string> sentences;
  size_t begin = 0;
  size_t pos = 0;
  const auto flush = [&](size_t end) {
    std::string_view piece = text.substr(begin, end - begin);
    size_t a = piece.find_first_not_of(" \t\r\n");
    if (a != std::string_view::npos) {
      size_t b = piece.find_last_not_of(" \t\r\n");
      sentences.emplace_back(piece.substr(a, b - a + 1));
    }
    begin = end;
  };
  while (pos < text.size()) {
    bool matched = false;
    for (const std::string &term : terminators) {
      if (term.empty() || text.compare(pos, term.size(), term) != 0) continue;
      size_t after = pos + term.size();
      bool ascii = term.size() == 1 &&
                   static_cast<unsigned char>(term[0]) < 0x80;
      if (ascii && after < text.size()) {
        char next = text[after];
        if (next != ' ' && next != '\t' && next != '\n' && next != '\r') {
          continue;
        }
      }
      flush(after);
      pos = after;
      matched = true;
      break;
    }
    if (matched) continue;
    // Blank lines also separate sentences.
    if (text[pos] == '\n') {
      size_t p = pos + 1;
      while (p < text.size() && (text[p] == ' ' || text[p] == '\t' ||
                                 text[p] == '\r')) {
        ++p;
      }
      if (p < text.size() && text[p] == '\n') {
        flush(pos);
        pos = p + 1;
        continue;
      }
    }
    ++pos;
  }
  flush(text.size());
  return sentences;
}

std::string JoinTokens(std::span<const Token> tokens, size_t begin,
                       size_t end) {
  std::string out;
  end = std::min(end, tokens.size());
  for (size_t i = begin; i < end; ++i) {
    if (i > begin) out += ' ';
    out += tokens[i].text;
  }
  return out;
}

std::string JoinTokens(std::span<const Token> tokens) {
  return JoinTokens(tokens, 0, tokens.size());
}

uint64_t Fnv1a64(std::string_view data, uint64_t seed) {
  uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace quantret
