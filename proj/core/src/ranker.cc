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

#include "quantret/ranker.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "binary_io.h"
#include "quantret/bm25.h"
#include "quantret/error.h"
#include "quantret/text.h"

namespace quantret {
namespace {

constexpr std::string_view kEncoderMagic = "QRHENC01";

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Uniform in [0, 1) from the top 53 bits.
double Unit(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

EmbeddingVector MeanRows(const HashedEncoder &enc,
                         const std::vector<uint32_t> &features) {
  EmbeddingVector h(enc.dim(), 0.0);
  if (features.empty()) return h;
  for (uint32_t f : features) {
    std::span<const float> row = enc.row(f);
    for (size_t d = 0; d < h.size(); ++d) h[d] += row[d];
  }
  double inv = 1.0 / static_cast<double>(features.size());
  for (double &x : h) x *= inv;
  return h;
}

struct PreparedPair {
  std::vector<uint32_t> fa;
  std::vector<uint32_t> fb;
  bool positive;
};

// Loss for one pair; applies the SGD step when `lr` > 0. Returns -1 when a
// side embeds to zero.
double Step(HashedEncoder &enc, const PreparedPair &p, double margin,
            double lr) {
  EmbeddingVector ha = MeanRows(enc, p.fa);
  EmbeddingVector hb = MeanRows(enc, p.fb);
  double na2 = Dot(ha, ha);
  double nb2 = Dot(hb, hb);
  if (na2 == 0 || nb2 == 0) return -1;
  double na = std::sqrt(na2);
  double nb = std::sqrt(nb2);
  double s = Dot(ha, hb) / (na * nb);
  double loss;
  double dl_ds;
  if (p.positive) {
    loss = (1 - s) * (1 - s);
    dl_ds = -2 * (1 - s);
  } else if (s > margin) {
    loss = (s - margin) * (s - margin);
    dl_ds = 2 * (s - margin);
  } else {
    return 0;
  }
  if (lr <= 0 || dl_ds == 0) return loss;
  const size_t dim = enc.dim();
  // ds/dha = hb/(|a||b|) - s ha/|a|^2, spread evenly over the feature rows.
  std::vector<double> ga(dim);
  std::vector<double> gb(dim);
  for (size_t d = 0; d < dim; ++d) {
    ga[d] = dl_ds * (hb[d] / (na * nb) - s * ha[d] / na2);
    gb[d] = dl_ds * (ha[d] / (na * nb) - s * hb[d] / nb2);
  }
  double sa = lr / static_cast<double>(p.fa.size());
  double sb = lr / static_cast<double>(p.fb.size());
  for (uint32_t f : p.fa) {
    std::span<float> row = enc.row(f);
    for (size_t d = 0; d < dim; ++d) row[d] -= static_cast<float>(sa * ga[d]);
  }
  for (uint32_t f : p.fb) {
    std::span<float> row = enc.row(f);
    for (size_t d = 0; d < dim; ++d) row[d] -= static_cast<float>(sb * gb[d]);
  }
  return loss;
}

}  // namespace

double CosineScore(std::span<const double> x, std::span<const double> d) {
  if (x.size() != d.size()) {
    throw Error(ErrorCode::kInvalidArgument, "embedding dimensions differ");
  }
  double nx = Dot(x, x);
  double nd = Dot(d, d);
  if (nx == 0 || nd == 0) {
    throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  }
  double s = Dot(x, d) / (std::sqrt(nx) * std::sqrt(nd));
  return std::clamp(s, -1.0, 1.0);
}

HashedEncoder HashedEncoder::Initialize(const HashedEncoderConfig &config) {
  if (config.buckets == 0 || config.dim == 0) {
    throw Error(ErrorCode::kInvalidConfig, "encoder needs buckets and dim > 0");
  }
  HashedEncoder enc;
  enc.config_ = config;
  enc.weights_.resize(static_cast<size_t>(config.buckets) * config.dim);
  std::mt19937_64 rng(config.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.dim));
  for (float &w : enc.weights_) {
    w = static_cast<float>((2 * Unit(rng) - 1) * scale);
  }
  return enc;
}

std::vector<uint32_t> HashedEncoder::Features(std::string_view text) const {
  static const TermTokenizer tokenizer;
  const uint64_t basis = 0xcbf29ce484222325ULL ^
                         (config_.seed * 0x9e3779b97f4a7c15ULL);
  std::vector<uint32_t> out;
  for (const std::string &word : tokenizer.Tokenize(text)) {
    out.push_back(static_cast<uint32_t>(Fnv1a64("w:" + word, basis) %
                                        config_.buckets));
    std::string padded = "#" + word + "#";
    if (padded.size() < 3) continue;
    for (size_t i = 0; i + 3 <= padded.size(); ++i) {
      out.push_back(static_cast<uint32_t>(
          Fnv1a64("c:" + padded.substr(i, 3), basis) % config_.buckets));
    }
  }
  return out;
}

EmbeddingVector HashedEncoder::Encode(std::string_view text) const {
  return MeanRows(*this, Features(text));
}

std::string HashedEncoder::Serialize() const {
  internal::ByteWriter w;
  w.PutBytes(kEncoderMagic.data(), kEncoderMagic.size());
  w.Put<uint32_t>(config_.buckets);
  w.Put<uint32_t>(config_.dim);
  w.Put<uint64_t>(config_.seed);
  w.PutBytes(weights_.data(), weights_.size() * sizeof(float));
  return w.bytes();
}

HashedEncoder HashedEncoder::Deserialize(std::string_view bytes) {
  internal::ByteReader r(bytes);
  char magic[8];
  r.GetBytes(magic, sizeof(magic));
  if (std::string_view(magic, 8) != kEncoderMagic) {
    throw Error(ErrorCode::kParseError, "not an encoder checkpoint");
  }
  HashedEncoder enc;
  enc.config_.buckets = r.Get<uint32_t>();
  enc.config_.dim = r.Get<uint32_t>();
  enc.config_.seed = r.Get<uint64_t>();
  enc.weights_.resize(static_cast<size_t>(enc.config_.buckets) * enc.config_.dim);
  r.GetBytes(enc.weights_.data(), enc.weights_.size() * sizeof(float));
  if (!r.done()) throw Error(ErrorCode::kParseError, "trailing encoder bytes");
  return enc;
}

void HashedEncoder::Save(const std::string &path) const {
  internal::WriteBinaryFile(path, Serialize());
}

HashedEncoder HashedEncoder::Load(const std::string &path) {
  try {
    return Deserialize(internal::ReadBinaryFile(path));
  } catch (const Error &e) {
    if (!e.file().empty()) throw;
    throw Error(e.code(), e.what(), path, 0);
  }
}

HashedEncoder TrainContrastive(const HashedEncoder &initial,
                               std::span<const ContrastivePair> pairs,
                               const ContrastiveConfig &config,
                               ContrastiveTrace *trace) {
  if (!(config.margin > 0 && config.margin <= 1)) {
    throw Error(ErrorCode::kInvalidConfig, "margin must lie in (0, 1]");
  }
  if (config.max_negatives < 1) {
    throw Error(ErrorCode::kInvalidConfig, "max_negatives must be >= 1");
  }
  bool has_pos = false;
  bool has_neg = false;
  for (const ContrastivePair &p : pairs) (p.positive ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::kEmptyPairSet,
                "training needs at least one positive and one negative pair");
  }

  HashedEncoder enc = initial;
  std::vector<PreparedPair> prepared;
  prepared.reserve(pairs.size());
  std::vector<size_t> positives;
  std::vector<std::pair<size_t, std::vector<size_t>>> negative_groups;
  {
    std::vector<std::pair<size_t, size_t>> negs;  // (query, pair index)
    for (size_t i = 0; i < pairs.size(); ++i) {
      prepared.push_back({enc.Features(pairs[i].a), enc.Features(pairs[i].b),
                          pairs[i].positive});
      if (pairs[i].positive) {
        positives.push_back(i);
      } else {
        negs.emplace_back(pairs[i].query, i);
      }
    }
    std::stable_sort(negs.begin(), negs.end(),
                     [](const auto &a, const auto &b) { return a.first < b.first; });
    for (const auto &[query, index] : negs) {
      if (negative_groups.empty() || negative_groups.back().first != query) {
        negative_groups.push_back({query, {}});
      }
      negative_groups.back().second.push_back(index);
    }
  }

  std::mt19937_64 rng(config.seed);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<size_t> order = positives;
    for (auto &[query, group] : negative_groups) {
      // Partial Fisher-Yates: a uniform sample without replacement.
      size_t take = std::min(config.max_negatives, group.size());
      for (size_t i = 0; i < take; ++i) {
        size_t j = i + static_cast<size_t>(rng() % (group.size() - i));
        std::swap(group[i], group[j]);
        order.push_back(group[i]);
      }
    }
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<size_t>(rng() % i)]);
    }
    double total = 0;
    size_t counted = 0;
    for (size_t index : order) {
      double loss = Step(enc, prepared[index], config.margin,
                         config.learning_rate);
      if (loss < 0) continue;
      total += loss;
      ++counted;
    }
    if (trace != nullptr) {
      trace->epoch_loss.push_back(counted == 0 ? 0.0 : total / counted);
    }
  }
  return enc;
}

double ContrastiveLoss(const Encoder &encoder,
                       std::span<const ContrastivePair> pairs, double margin) {
  double total = 0;
  size_t counted = 0;
  for (const ContrastivePair &p : pairs) {
    EmbeddingVector a = encoder.Encode(p.a);
    EmbeddingVector b = encoder.Encode(p.b);
    if (Dot(a, a) == 0 || Dot(b, b) == 0) continue;
    double s = CosineScore(a, b);
    total += p.positive ? (1 - s) * (1 - s)
                        : (s > margin ? (s - margin) * (s - margin) : 0.0);
    ++counted;
  }
  return counted == 0 ? 0.0 : total / counted;
}

EmbeddingTable EmbeddingTable::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open file", path, 0);
  EmbeddingTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorCode::kParseError, "expected id<TAB>values", path, line_no);
    }
    EmbeddingVector v;
    std::string_view rest(line);
    rest.remove_prefix(tab + 1);
    while (!rest.empty()) {
      size_t comma = rest.find(',');
      std::string field(rest.substr(0, comma));
      char *end = nullptr;
      double x = std::strtod(field.c_str(), &end);
      if (field.empty() || end != field.c_str() + field.size() ||
          !std::isfinite(x)) {
        throw Error(ErrorCode::kParseError, "bad vector component '" + field + "'",
                    path, line_no);
      }
      v.push_back(x);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (v.empty()) throw Error(ErrorCode::kParseError, "empty vector", path, line_no);
    try {
      table.Add(line.substr(0, tab), std::move(v));
    } catch (const Error &e) {
      throw Error(e.code(), e.what(), path, line_no);
    }
  }
  return table;
}

void EmbeddingTable::Save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write file", path, 0);
  char buf[32];
  for (const std::string &id : ids_) {
    out << id << '\t';
    const EmbeddingVector &v = vectors_.at(id);
    for (size_t i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
      if (i > 0) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, "write failed", path, 0);
}

void EmbeddingTable::Add(std::string id, EmbeddingVector vector) {
  if (dim_ == 0) dim_ = vector.size();
  if (vector.size() != dim_) {
    throw Error(ErrorCode::kParseError,
                "vector dimension " + std::to_string(vector.size()) +
                    " differs from table dimension " + std::to_string(dim_));
  }
  if (vectors_.count(id)) {
    throw Error(ErrorCode::kDuplicateId, "duplicate embedding id " + id);
  }
  ids_.push_back(id);
  vectors_.emplace(std::move(id), std::move(vector));
}

const EmbeddingVector *EmbeddingTable::Find(std::string_view id) const {
  auto it = vectors_.find(std::string(id));
  return it == vectors_.end() ? nullptr : &it->second;
}

DenseIndex DenseIndex::Build(std::vector<std::string> ids,
                             std::vector<EmbeddingVector> vectors) {
  if (ids.size() != vectors.size()) {
    throw Error(ErrorCode::kInvalidArgument, "ids and vectors differ in length");
  }
  DenseIndex index;
  index.dim_ = vectors.empty() ? 0 : vectors.front().size();
  for (const EmbeddingVector &v : vectors) {
    if (v.size() != index.dim_) {
      throw Error(ErrorCode::kInvalidArgument, "inconsistent vector dimension");
    }
    index.norms_.push_back(std::sqrt(Dot(v, v)));
  }
  index.ids_ = std::move(ids);
  index.vectors_ = std::move(vectors);
  return index;
}

DenseIndex DenseIndex::Build(std::vector<std::string> ids,
                             std::span<const std::string> texts,
                             const Encoder &encoder) {
  std::vector<EmbeddingVector> vectors;
  vectors.reserve(texts.size());
  for (const std::string &t : texts) vectors.push_back(encoder.Encode(t));
  return Build(std::move(ids), std::move(vectors));
}

std::vector<DenseHit> DenseIndex::Search(std::span<const double> query,
                                         size_t k) const {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (ids_.empty()) return {};
  if (query.size() != dim_) {
    throw Error(ErrorCode::kInvalidArgument, "query dimension mismatch");
  }
  double qn = std::sqrt(Dot(query, query));
  if (qn == 0) return {};
  std::vector<DenseHit> hits;
  hits.reserve(ids_.size());
  for (size_t r = 0; r < ids_.size(); ++r) {
    if (norms_[r] == 0) continue;
    double s = Dot(query, vectors_[r]) / (qn * norms_[r]);
    hits.push_back({static_cast<uint32_t>(r), s});
  }
  size_t top = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<long>(top),
                    hits.end(), [this](const DenseHit &a, const DenseHit &b) {
                      if (a.score != b.score) return a.score > b.score;
                      return ids_[a.ref] < ids_[b.ref];
                    });
  hits.resize(top);
  return hits;
}

}  // namespace quantret
