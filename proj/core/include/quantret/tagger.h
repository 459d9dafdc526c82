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

#ifndef QUANTRET_TAGGER_H_
#define QUANTRET_TAGGER_H_

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "quantret/description.h"
#include "quantret/quantity.h"

namespace quantret {

// Assigns BIEO tags to a pivot sentence. Implementations need not produce
// legal sequences; TagSentence() repairs them.
class Tagger {
 public:
  virtual ~Tagger() = default;

  virtual TagSequence Tag(const PivotSentence &sentence) const = 0;
  virtual std::string_view name() const = 0;
  virtual void Save(const std::string &path) const = 0;
};

// Tags and repairs: the result always decodes.
TagSequence TagSentence(const PivotSentence &sentence, const Tagger &tagger);

// Mark, tag, decode.
Description ParseDescription(std::span<const Token> tokens,
                             const RawQuantity &pivot, const Tagger &tagger);

// Nearest run of noun-like tokens left of the pivot, plus every year token
// left of the pivot as a one-token segment.
class RuleBaselineTagger : public Tagger {
 public:
  RuleBaselineTagger();
  explicit RuleBaselineTagger(QuantityExtractor extractor);

  TagSequence Tag(const PivotSentence &sentence) const override;
  std::string_view name() const override { return "rule"; }
  void Save(const std::string &path) const override;

  static bool IsFunctionWord(std::string_view lowered);

 private:
  QuantityExtractor extractor_;
};

struct TaggerTrainingReport {
  // Strict segment F1 on the training set after each epoch.
  std::vector<double> epoch_f1;
};

// First-order averaged structured perceptron over sparse string features,
// decoded with a BIEO-constrained Viterbi.
class PerceptronTagger : public Tagger {
 public:
  static constexpr uint32_t kFeatureTemplateVersion = 1;

  PerceptronTagger() = default;

  // Deterministic given (data order, epochs, seed). Throws
  // Error(kEmptyDataset) when `data` is empty.
  static PerceptronTagger Train(std::span<const LabeledExample> data,
                                int epochs, uint64_t seed,
                                TaggerTrainingReport *report = nullptr);

  TagSequence Tag(const PivotSentence &sentence) const override;
  std::string_view name() const override { return "perceptron"; }
  void Save(const std::string &path) const override;
  std::string Serialize() const;
  static PerceptronTagger Deserialize(std::string_view bytes);

  uint64_t seed() const { return seed_; }
  size_t num_features() const { return feature_names_.size(); }

  bool operator==(const PerceptronTagger &other) const;

  // Feature strings for position `pos`; exposed for tests.
  static std::vector<std::string> Features(const PivotSentence &sentence,
                                           size_t pos);

 private:
  using TagScores = std::array<double, kNumTags>;

  TagSequence Viterbi(const PivotSentence &sentence,
                      const std::vector<std::vector<int>> &features,
                      const std::vector<double> &emission,
                      const std::vector<double> &transition) const;
  std::vector<std::vector<int>> Lookup(const PivotSentence &sentence) const;

  uint64_t seed_ = 0;
  std::vector<std::string> feature_names_;
  std::unordered_map<std::string, int> feature_ids_;
  std::vector<double> emission_;    // feature * kNumTags + tag
  std::vector<double> transition_;  // (prev + 1) * kNumTags + tag, prev=-1 start
};

// Loads any tagger written by Tagger::Save().
std::unique_ptr<Tagger> LoadTagger(const std::string &path);

}  // namespace quantret

#endif  // QUANTRET_TAGGER_H_
