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

#ifndef QUANTRET_CORPUS_H_
#define QUANTRET_CORPUS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "quantret/bm25.h"
#include "quantret/description.h"
#include "quantret/quantity.h"
#include "quantret/tagger.h"
#include "quantret/text.h"

namespace quantret {

inline constexpr int kCorpusSchemaVersion = 1;

// A sentence holding at least one quantity. sentence_id is the index of the
// sentence within its document before filtering.
struct SentenceRecord {
  std::string doc_id;
  int sentence_id = 0;
  std::vector<Token> tokens;
  std::vector<RawQuantity> quantities;
  std::vector<NormalizedValue> values;  // parallel to quantities

  std::string id() const;
  std::string text() const { return JoinTokens(tokens); }
  bool operator==(const SentenceRecord &other) const = default;
};

// One (description, quantity) row. record_id is "doc:sentence:quantity".
struct QuantityRecord {
  std::string record_id;
  std::string description_text;
  std::vector<Segment> segments;
  NormalizedValue value;
  std::string surface;
  std::string evidence;
  std::string doc_id;
  int sentence_id = 0;
  size_t pivot_begin = 0;
  size_t pivot_end = 0;

  std::string sentence_key() const;
  bool operator==(const QuantityRecord &other) const = default;
};

struct Document {
  std::string doc_id;
  std::string text;
};

struct BuildReport {
  size_t documents = 0;
  size_t sentences = 0;   // sentences with at least one quantity
  size_t quantities = 0;
  size_t records = 0;
  size_t skipped_empty = 0;  // quantities whose description decoded empty
  std::vector<std::pair<std::string, std::string>> failures;  // doc_id, message

  bool operator==(const BuildReport &other) const = default;
};

struct CorpusBuildOptions {
  size_t evidence_window = 30;
  std::vector<std::string> terminators = DefaultSentenceTerminators();
};

struct Corpus {
  std::vector<SentenceRecord> sentences;
  std::vector<QuantityRecord> records;
  BuildReport report;

  // Index of the sentence a record was parsed from.
  std::optional<size_t> FindSentence(std::string_view key) const;
  bool operator==(const Corpus &other) const {
    return sentences == other.sentences && records == other.records &&
           report == other.report;
  }
};

// Tokens within `window` of [begin, end), clipped to the sentence.
std::string MakeEvidence(std::span<const Token> tokens, size_t begin,
                         size_t end, size_t window);

// A failing document is reported and its partial output discarded; the
// batch continues.
Corpus BuildCorpus(std::span<const Document> docs,
                   const QuantityExtractor &extractor, const Tagger &tagger,
                   const CorpusBuildOptions &options = {});

// Sentence-mode records for one sentence only; exposed for tests.
std::vector<QuantityRecord> BuildRecords(const SentenceRecord &sentence,
                                         const Tagger &tagger,
                                         size_t evidence_window,
                                         size_t *skipped_empty = nullptr);

// *.txt files in `dir`, sorted by name; doc_id is the file stem.
std::vector<Document> LoadDocuments(const std::string &dir);

// Index inputs: descriptions for C_q, whole sentences for C_s.
std::vector<IndexedRecord> DescriptionDocuments(
    std::span<const QuantityRecord> records);
std::vector<IndexedRecord> SentenceDocuments(
    std::span<const SentenceRecord> sentences);

// Line-delimited JSON with a schema header line. Loading reports corrupt
// lines with their 1-based line number.
void SaveRecords(const std::string &path,
                 std::span<const QuantityRecord> records);
std::vector<QuantityRecord> LoadRecords(const std::string &path);
void SaveSentences(const std::string &path,
                   std::span<const SentenceRecord> sentences);
std::vector<SentenceRecord> LoadSentences(const std::string &path);

// Writes sentences.jsonl, records.jsonl and build_report.json under `dir`.
void SaveCorpus(const std::string &dir, const Corpus &corpus);
Corpus LoadCorpus(const std::string &dir);

std::string ValueToJson(const NormalizedValue &value);
NormalizedValue ValueFromJson(std::string_view json);

}  // namespace quantret

#endif  // QUANTRET_CORPUS_H_
