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

#ifndef QUANTRET_RANKER_H_
#define QUANTRET_RANKER_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace quantret {

using EmbeddingVector = std::vector<double>;

// x.d / (|x| |d|). Throws Error(kZeroVector) if either vector is all zero
// and Error(kInvalidArgument) on a dimension mismatch.
double CosineScore(std::span<const double> x, std::span<const double> d);

class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual EmbeddingVector Encode(std::string_view text) const = 0;
  virtual size_t dim() const = 0;
};

struct HashedEncoderConfig {
  uint32_t buckets = 1u << 15;
  uint32_t dim = 256;
  uint64_t seed = 0;

  bool operator==(const HashedEncoderConfig &other) const = default;
};

// Word unigrams and character trigrams hashed into buckets; each bucket owns
// a learned row of the projection, and a text embeds as the mean of its
// feature rows.
class HashedEncoder : public Encoder {
 public:
  HashedEncoder() = default;
  // Rows drawn uniformly from [-1/sqrt(dim), 1/sqrt(dim)] with `seed`.
  static HashedEncoder Initialize(const HashedEncoderConfig &config);

  EmbeddingVector Encode(std::string_view text) const override;
  size_t dim() const override { return config_.dim; }
  const HashedEncoderConfig &config() const { return config_; }

  // Bucket ids of the text's features, duplicates kept.
  std::vector<uint32_t> Features(std::string_view text) const;
  std::span<float> row(uint32_t bucket) {
    return {weights_.data() + static_cast<size_t>(bucket) * config_.dim,
            config_.dim};
  }
  std::span<const float> row(uint32_t bucket) const {
    return {weights_.data() + static_cast<size_t>(bucket) * config_.dim,
            config_.dim};
  }

  std::string Serialize() const;
  static HashedEncoder Deserialize(std::string_view bytes);
  void Save(const std::string &path) const;
  static HashedEncoder Load(const std::string &path);

  bool operator==(const HashedEncoder &other) const {
    return config_ == other.config_ && weights_ == other.weights_;
  }

 private:
  HashedEncoderConfig config_;
  std::vector<float> weights_;
};

struct ContrastiveConfig {
  double margin = 0.5;
  size_t max_negatives = 5;  // per query per epoch
  int epochs = 5;
  double learning_rate = 0.5;
  uint64_t seed = 0;
};

// One training pair. Negatives are grouped by `query` for down-sampling.
struct ContrastivePair {
  std::string a;
  std::string b;
  bool positive = false;
  size_t query = 0;
};

struct ContrastiveTrace {
  std::vector<double> epoch_loss;  // mean loss over the pairs of each epoch
};

// Online contrastive SGD: positives pay (1 - s)^2, negatives
// max(0, s - margin)^2 with s the cosine of the two embeddings. Throws
// Error(kEmptyPairSet) unless both labels are present and
// Error(kInvalidConfig) for a margin outside (0, 1] or zero negatives.
HashedEncoder TrainContrastive(const HashedEncoder &initial,
                               std::span<const ContrastivePair> pairs,
                               const ContrastiveConfig &config,
                               ContrastiveTrace *trace = nullptr);

// Mean loss of `pairs` under `encoder`, pairs with a zero embedding skipped.
double ContrastiveLoss(const Encoder &encoder,
                       std::span<const ContrastivePair> pairs, double margin);

// Externally computed vectors keyed by record id.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(size_t dim) : dim_(dim) {}

  // Lines "id<TAB>v1,v2,...". Throws Error(kParseError) naming the line on
  // malformed or non-finite input and Error(kDuplicateId) on repeats.
  static EmbeddingTable Load(const std::string &path);
  void Save(const std::string &path) const;

  void Add(std::string id, EmbeddingVector vector);
  const EmbeddingVector *Find(std::string_view id) const;
  size_t size() const { return ids_.size(); }
  size_t dim() const { return dim_; }
  const std::vector<std::string> &ids() const { return ids_; }

 private:
  size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, EmbeddingVector> vectors_;
};

struct DenseHit {
  uint32_t ref = 0;
  double score = 0;
};

// Exhaustive cosine search over stored vectors, ties broken by record id.
class DenseIndex {
 public:
  DenseIndex() = default;
  // Zero vectors are stored but never returned.
  static DenseIndex Build(std::vector<std::string> ids,
                          std::vector<EmbeddingVector> vectors);
  static DenseIndex Build(std::vector<std::string> ids,
                          std::span<const std::string> texts,
                          const Encoder &encoder);

  // Empty for a zero query vector. Requires k >= 1.
  std::vector<DenseHit> Search(std::span<const double> query, size_t k) const;

  size_t size() const { return ids_.size(); }
  size_t dim() const { return dim_; }
  const std::string &id(uint32_t ref) const { return ids_.at(ref); }
  const EmbeddingVector &vector(uint32_t ref) const { return vectors_.at(ref); }

 private:
  size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<EmbeddingVector> vectors_;
  std::vector<double> norms_;
};

}  // namespace quantret

#endif  // QUANTRET_RANKER_H_
