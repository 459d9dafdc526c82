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

#ifndef QUANTRET_BM25_H_
#define QUANTRET_BM25_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace quantret {

struct TokenizerConfig {
  bool lowercase = true;
  // CJK runs emit character bigrams in addition to unigrams.
  bool cjk_bigrams = true;

  uint64_t Fingerprint() const;
  bool operator==(const TokenizerConfig &other) const = default;
};

// Index-term tokenizer: words of letters/digits (digits keep interior
// '.' and ','), lowercased; CJK text falls back to character n-grams.
class TermTokenizer {
 public:
  explicit TermTokenizer(TokenizerConfig config = {}) : config_(config) {}

  std::vector<std::string> Tokenize(std::string_view text) const;
  const TokenizerConfig &config() const { return config_; }

 private:
  TokenizerConfig config_;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;

  bool operator==(const Bm25Params &other) const = default;
};

struct IndexedRecord {
  std::string id;
  std::string text;
};

struct Posting {
  uint32_t ref = 0;  // position of the record in build order
  uint32_t tf = 0;

  bool operator==(const Posting &other) const = default;
};

// Sorted by score descending, then ref ascending.
struct ScoredHit {
  uint32_t ref = 0;
  double score = 0;
};

bool HitOrder(const ScoredHit &a, const ScoredHit &b);

uint64_t ContentHash(std::span<const IndexedRecord> records);

// Immutable BM25 inverted index. Idf uses the Robertson-Sparck Jones form
// ln((N - df + 0.5) / (df + 0.5)) floored at 0.
class InvertedIndex {
 public:
  InvertedIndex() = default;

  // Throws Error(kDuplicateId) on repeated ids.
  static InvertedIndex Build(std::span<const IndexedRecord> records,
                             TokenizerConfig tokenizer = {},
                             Bm25Params params = {});

  // Top-k records sharing at least one query term. Requires k >= 1.
  std::vector<ScoredHit> Search(std::string_view query, size_t k) const;

  size_t size() const { return ids_.size(); }
  const std::string &id(uint32_t ref) const { return ids_.at(ref); }
  const std::vector<std::string> &ids() const { return ids_; }
  std::optional<uint32_t> Find(std::string_view id) const;

  std::span<const Posting> postings(std::string_view term) const;
  size_t num_terms() const { return postings_.size(); }
  uint32_t doc_length(uint32_t ref) const { return lengths_.at(ref); }
  double average_length() const { return average_length_; }
  double Idf(size_t df) const;

  const Bm25Params &params() const { return params_; }
  const TokenizerConfig &tokenizer_config() const { return tokenizer_.config(); }

  std::string Serialize() const;
  static InvertedIndex Deserialize(std::string_view bytes);

  // Binary cache keyed by corpus content hash and tokenizer fingerprint.
  void SaveCache(const std::string &path, uint64_t content_hash) const;
  // nullopt when the file is missing, stale, or built with another
  // tokenizer configuration.
  static std::optional<InvertedIndex> LoadCache(const std::string &path,
                                                uint64_t content_hash,
                                                const TokenizerConfig &tokenizer);

  bool operator==(const InvertedIndex &other) const;

 private:
  TermTokenizer tokenizer_;
  Bm25Params params_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, uint32_t> id_lookup_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::vector<uint32_t> lengths_;
  double average_length_ = 0;
};

}  // namespace quantret

#endif  // QUANTRET_BM25_H_
