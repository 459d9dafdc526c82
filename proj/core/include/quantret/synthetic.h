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

#ifndef QUANTRET_SYNTHETIC_H_
#define QUANTRET_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "quantret/corpus.h"
#include "quantret/description.h"

namespace quantret {

// Parameters of the synthetic report generator. Facts are (entity,
// indicator, year) values; each is mentioned in several documents under
// paraphrased indicator wordings and, sometimes, at reduced precision.
// Distractor sentences state the next year's value of the same indicator
// and compare it with the earlier year, so they share the earlier fact's
// terms without holding its value.
struct SyntheticCorpusSpec {
  size_t facts = 600;
  size_t min_mentions = 3;  // per fact
  size_t max_mentions = 5;
  double distractor_rate = 0.45;  // target share of quantity sentences
  int min_sig_digits = 2;
  int max_sig_digits = 5;
  double rounded_mention_rate = 0.3;
  double note_rate = 0.05;  // sentences with a non-factual quantity
  size_t sentences_per_doc = 8;
  uint64_t seed = 1;
};

struct SyntheticMention {
  std::string surface;
  std::string fact_id;  // empty for non-factual quantities
};

struct SyntheticSentence {
  std::string doc_id;
  size_t index = 0;  // position among the document's sentences
  std::string text;
  bool distractor = false;
  std::vector<SyntheticMention> mentions;
};

struct SyntheticCorpus {
  std::vector<Document> documents;
  std::vector<SyntheticSentence> sentences;
  // Gold descriptions for every quantity in `documents`.
  std::vector<LabeledExample> gold;
  size_t facts = 0;
  double distractor_fraction = 0;  // among sentences with quantities
};

// Byte-identical output for identical specs.
SyntheticCorpus GenerateSyntheticCorpus(const SyntheticCorpusSpec &spec);

// Tagger training data drawn from an independent world sample.
std::vector<LabeledExample> GenerateLabeledExamples(size_t count,
                                                    uint64_t seed);

// docs/<doc_id>.txt, truth.jsonl, gold.jsonl, and labeled.jsonl when
// `labeled` is non-empty.
void WriteSyntheticCorpus(const std::string &dir, const SyntheticCorpus &corpus,
                          const std::vector<LabeledExample> &labeled);

}  // namespace quantret

#endif  // QUANTRET_SYNTHETIC_H_
