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

#ifndef QUANTRET_CONFIG_H_
#define QUANTRET_CONFIG_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quantret/bm25.h"
#include "quantret/quantity.h"
#include "quantret/ranker.h"
#include "quantret/weak_supervision.h"

namespace quantret {

struct ExtractorSettings {
  NumberFormat format;
  std::string magnitude_lexicon;  // file path; built-in lexicon when empty
  std::string unit_lexicon;
};

struct TaggerSettings {
  std::string kind = "perceptron";  // or "rule"
  int epochs = 20;
};

struct EvalSettings {
  double train_fraction = 0.7;
  size_t cutoff = 10;
  size_t max_queries = 0;  // 0: every eligible test record
  QueryFilter query_filter{true, 2, 2};
};

struct PathSettings {
  std::string corpus;      // corpus directory
  std::string tagger;      // tagger checkpoint
  std::string ranker;      // encoder checkpoint
  std::string embeddings;  // imported record embeddings
  std::string pairs;       // mined pairs
  std::string labels;      // manual relevance labels
};

struct ServiceSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";
};

struct PipelineConfig {
  TokenizerConfig tokenizer;
  std::vector<std::string> terminators = DefaultSentenceTerminators();
  ExtractorSettings extractor;
  Bm25Params bm25;
  MiningOptions mining;
  HashedEncoderConfig encoder;
  ContrastiveConfig contrastive;
  TaggerSettings tagger;
  size_t evidence_window = 30;
  uint64_t seed = 1;
  EvalSettings eval;
  PathSettings paths;
  ServiceSettings service;

  QuantityExtractor MakeExtractor() const;
  std::string ToJson() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string &)>;

// Keys not listed in ToJson() are rejected with Error(kInvalidConfig).
PipelineConfig ParseConfig(std::string_view json_text,
                           const std::string &source = "<string>");
PipelineConfig LoadConfig(const std::string &path);

// QUANTRET_<SECTION>_<KEY> (or QUANTRET_<KEY> for top-level keys) replaces
// the value; the variable text is read as JSON, falling back to a string.
PipelineConfig ApplyEnvOverrides(const PipelineConfig &config,
                                 const EnvLookup &lookup);
EnvLookup ProcessEnv();

}  // namespace quantret

#endif  // QUANTRET_CONFIG_H_
