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

#include "quantret/bm25.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "binary_io.h"
#include "quantret/error.h"
#include "quantret/text.h"

namespace quantret {
namespace {

constexpr std::string_view kCacheMagic = "QRBM25IX";
constexpr uint32_t kCacheVersion = 1;

bool IsAsciiAlnum(char32_t cp) {
  return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
         (cp >= '0' && cp <= '9');
}

bool IsDigit(char32_t cp) { return cp >= '0' && cp <= '9'; }

bool IsWordChar(char32_t cp) {
  if (IsAsciiAlnum(cp)) return true;
  if (cp < 0xC0) return false;
  return !IsCjk(cp) && !IsCjkPunctuation(cp) && cp != 0x3000 && cp != 0xFFFD;
}

}  // namespace

uint64_t TokenizerConfig::Fingerprint() const {
  std::string desc = "term-tokenizer/v1";
  desc += lowercase ? ";lower" : ";case";
  desc += cjk_bigrams ? ";cjk12" : ";cjk1";
  return Fnv1a64(desc);
}

std::vector<std::string> TermTokenizer::Tokenize(std::string_view text) const {
  std::vector<char32_t> cps;
  cps.reserve(text.size());
  for (size_t pos = 0; pos < text.size();) cps.push_back(DecodeUtf8(text, pos));

  std::vector<std::string> terms;
  std::string word;
  const auto flush_word = [&]() {
    if (word.empty()) return;
    terms.push_back(config_.lowercase ? AsciiLower(word) : word);
    word.clear();
  };
  std::vector<char32_t> cjk_run;
  const auto flush_cjk = [&]() {
    for (size_t i = 0; i < cjk_run.size(); ++i) {
      std::string uni;
      AppendUtf8(cjk_run[i], uni);
      terms.push_back(uni);
      if (config_.cjk_bigrams && i + 1 < cjk_run.size()) {
        std::string bi = uni;
        AppendUtf8(cjk_run[i + 1], bi);
        terms.push_back(std::move(bi));
      }
    }
    cjk_run.clear();
  };

  for (size_t i = 0; i < cps.size(); ++i) {
    char32_t cp = cps[i];
    if (IsCjk(cp)) {
      flush_word();
      cjk_run.push_back(cp);
      continue;
    }
    flush_cjk();
    if (IsWordChar(cp)) {
      AppendUtf8(cp, word);
      continue;
    }
    char32_t prev = i > 0 ? cps[i - 1] : 0;
    char32_t next = i + 1 < cps.size() ? cps[i + 1] : 0;
    bool numeric_joint = (cp == '.' || cp == ',') && IsDigit(prev) &&
                         IsDigit(next) && !word.empty();
    bool amp_joint = cp == '&' && IsAsciiAlnum(prev) && IsAsciiAlnum(next) &&
                     !word.empty();
    if (numeric_joint || amp_joint) {
      AppendUtf8(cp, word);
    } else {
      flush_word();
    }
  }
  flush_word();
  flush_cjk();
  return terms;
}

bool HitOrder(const ScoredHit &a, const ScoredHit &b) {
  if (a.score != b.score) return a.score > b.score;
  return a.ref < b.ref;
}

uint64_t ContentHash(std::span<const IndexedRecord> records) {
  uint64_t h = Fnv1a64("quantret-corpus");
  for (const IndexedRecord &r : records) {
    h = Fnv1a64(r.id, h);
    h = Fnv1a64(std::string_view("\x1f", 1), h);
    h = Fnv1a64(r.text, h);
    h = Fnv1a64(std::string_view("\x1e", 1), h);
  }
  return h;
}

InvertedIndex InvertedIndex::Build(std::span<const IndexedRecord> records,
                                   TokenizerConfig tokenizer,
                                   Bm25Params params) {
  InvertedIndex index;
  index.tokenizer_ = TermTokenizer(tokenizer);
  index.params_ = params;
  index.ids_.reserve(records.size());
  index.lengths_.reserve(records.size());
  uint64_t total_length = 0;
  for (size_t ref = 0; ref < records.size(); ++ref) {
    const IndexedRecord &r = records[ref];
    if (!index.id_lookup_.emplace(r.id, static_cast<uint32_t>(ref)).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate record id " + r.id);
    }
    index.ids_.push_back(r.id);
    std::vector<std::string> terms = index.tokenizer_.Tokenize(r.text);
    index.lengths_.push_back(static_cast<uint32_t>(terms.size()));
    total_length += terms.size();
    std::map<std::string, uint32_t> tf;
    for (std::string &t : terms) ++tf[std::move(t)];
    for (auto &[term, count] : tf) {
      index.postings_[term].push_back({static_cast<uint32_t>(ref), count});
    }
  }
  index.average_length_ =
      records.empty() ? 0.0
                      : static_cast<double>(total_length) /
                            static_cast<double>(records.size());
  return index;
}

std::optional<uint32_t> InvertedIndex::Find(std::string_view id) const {
  auto it = id_lookup_.find(std::string(id));
  if (it == id_lookup_.end()) return std::nullopt;
  return it->second;
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
  auto it = postings_.find(std::string(term));
  if (it == postings_.end()) return {};
  return it->second;
}

double InvertedIndex::Idf(size_t df) const {
  double n = static_cast<double>(ids_.size());
  double d = static_cast<double>(df);
  return std::max(0.0, std::log((n - d + 0.5) / (d + 0.5)));
}

std::vector<ScoredHit> InvertedIndex::Search(std::string_view query,
                                             size_t k) const {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (ids_.empty()) return {};
  std::vector<double> scores(ids_.size(), 0.0);
  std::vector<uint32_t> touched;
  std::vector<bool> seen(ids_.size(), false);
  const double avgdl = average_length_ > 0 ? average_length_ : 1.0;
  const double k1 = params_.k1;
  const double b = params_.b;
  for (const std::string &term : tokenizer_.Tokenize(query)) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const std::vector<Posting> &list = it->second;
    double idf = Idf(list.size());
    for (const Posting &p : list) {
      double tf = p.tf;
      double norm = k1 * (1.0 - b + b * lengths_[p.ref] / avgdl);
      scores[p.ref] += idf * tf * (k1 + 1.0) / (tf + norm);
      if (!seen[p.ref]) {
        seen[p.ref] = true;
        touched.push_back(p.ref);
      }
    }
  }
  std::vector<ScoredHit> hits;
  hits.reserve(touched.size());
  for (uint32_t ref : touched) hits.push_back({ref, scores[ref]});
  size_t top = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<long>(top),
                    hits.end(), HitOrder);
  hits.resize(top);
  return hits;
}

std::string InvertedIndex::Serialize() const {
  internal::ByteWriter w;
  const TokenizerConfig &tc = tokenizer_.config();
  w.Put<uint8_t>(tc.lowercase);
  w.Put<uint8_t>(tc.cjk_bigrams);
  w.Put<double>(params_.k1);
  w.Put<double>(params_.b);
  w.Put<uint64_t>(ids_.size());
  for (size_t i = 0; i < ids_.size(); ++i) {
    w.PutString(ids_[i]);
    w.Put<uint32_t>(lengths_[i]);
  }
  std::vector<const std::string *> terms;
  terms.reserve(postings_.size());
  for (const auto &entry : postings_) terms.push_back(&entry.first);
  std::sort(terms.begin(), terms.end(),
            [](const std::string *a, const std::string *b) { return *a < *b; });
  w.Put<uint64_t>(terms.size());
  for (const std::string *term : terms) {
    const std::vector<Posting> &list = postings_.at(*term);
    w.PutString(*term);
    w.Put<uint64_t>(list.size());
    for (const Posting &p : list) {
      w.Put<uint32_t>(p.ref);
      w.Put<uint32_t>(p.tf);
    }
  }
  return w.bytes();
}

InvertedIndex InvertedIndex::Deserialize(std::string_view bytes) {
  internal::ByteReader r(bytes);
  InvertedIndex index;
  TokenizerConfig tc;
  tc.lowercase = r.Get<uint8_t>() != 0;
  tc.cjk_bigrams = r.Get<uint8_t>() != 0;
  index.tokenizer_ = TermTokenizer(tc);
  index.params_.k1 = r.Get<double>();
  index.params_.b = r.Get<double>();
  auto n = r.Get<uint64_t>();
  uint64_t total = 0;
  for (uint64_t i = 0; i < n; ++i) {
    index.ids_.push_back(r.GetString());
    index.id_lookup_.emplace(index.ids_.back(), static_cast<uint32_t>(i));
    index.lengths_.push_back(r.Get<uint32_t>());
    total += index.lengths_.back();
  }
  index.average_length_ =
      n == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(n);
  auto num_terms = r.Get<uint64_t>();
  for (uint64_t t = 0; t < num_terms; ++t) {
    std::string term = r.GetString();
    auto len = r.Get<uint64_t>();
    std::vector<Posting> list(len);
    for (Posting &p : list) {
      p.ref = r.Get<uint32_t>();
      p.tf = r.Get<uint32_t>();
      if (p.ref >= n) throw Error(ErrorCode::kParseError, "posting out of range");
    }
    index.postings_.emplace(std::move(term), std::move(list));
  }
  if (!r.done()) throw Error(ErrorCode::kParseError, "trailing index bytes");
  return index;
}

void InvertedIndex::SaveCache(const std::string &path,
                              uint64_t content_hash) const {
  internal::ByteWriter w;
  w.PutBytes(kCacheMagic.data(), kCacheMagic.size());
  w.Put<uint32_t>(kCacheVersion);
  w.Put<uint64_t>(content_hash);
  w.Put<uint64_t>(tokenizer_.config().Fingerprint());
  w.PutString(Serialize());
  internal::WriteBinaryFile(path, w.bytes());
}

std::optional<InvertedIndex> InvertedIndex::LoadCache(
    const std::string &path, uint64_t content_hash,
    const TokenizerConfig &tokenizer) {
  std::string bytes;
  try {
    bytes = internal::ReadBinaryFile(path);
  } catch (const Error &) {
    return std::nullopt;
  }
  try {
    internal::ByteReader r(bytes);
    char magic[8];
    r.GetBytes(magic, sizeof(magic));
    if (std::string_view(magic, 8) != kCacheMagic) return std::nullopt;
    if (r.Get<uint32_t>() != kCacheVersion) return std::nullopt;
    if (r.Get<uint64_t>() != content_hash) return std::nullopt;
    if (r.Get<uint64_t>() != tokenizer.Fingerprint()) return std::nullopt;
    return Deserialize(r.GetString());
  } catch (const Error &) {
    return std::nullopt;
  }
}

bool InvertedIndex::operator==(const InvertedIndex &other) const {
  return tokenizer_.config() == other.tokenizer_.config() &&
         params_ == other.params_ && ids_ == other.ids_ &&
         lengths_ == other.lengths_ && postings_ == other.postings_ &&
         average_length_ == other.average_length_;
}

}  // namespace quantret
