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

#include "quantret/corpus.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "quantret/error.h"

namespace quantret {
namespace {

using nlohmann::json;

constexpr std::string_view kSentenceSchema = "quantret.sentences";
constexpr std::string_view kRecordSchema = "quantret.records";

json ValueJson(const NormalizedValue &v) {
  json j = {{"negative", v.negative},
            {"mantissa", v.mantissa_digits},
            {"exponent", v.exponent},
            {"sig_digits", v.sig_digits},
            {"kind", std::string(KindName(v.kind))}};
  if (v.unit_tag) j["unit"] = *v.unit_tag;
  return j;
}

NormalizedValue ValueFrom(const json &j) {
  NormalizedValue v;
  v.negative = j.at("negative").get<bool>();
  v.mantissa_digits = j.at("mantissa").get<std::string>();
  v.exponent = j.at("exponent").get<int>();
  v.sig_digits = j.at("sig_digits").get<int>();
  v.kind = ParseKind(j.at("kind").get<std::string>());
  if (j.contains("unit")) v.unit_tag = j.at("unit").get<std::string>();
  if (v.mantissa_digits.empty() ||
      static_cast<size_t>(v.sig_digits) != v.mantissa_digits.size()) {
    throw Error(ErrorCode::kParseError, "inconsistent normalized value");
  }
  return v;
}

json TokensJson(std::span<const Token> tokens) {
  json arr = json::array();
  for (const Token &t : tokens) arr.push_back(t.text);
  return arr;
}

std::vector<Token> TokensFrom(const json &j) {
  return MakeTokens(j.get<std::vector<std::string>>());
}

json SentenceJson(const SentenceRecord &s) {
  json quantities = json::array();
  for (size_t i = 0; i < s.quantities.size(); ++i) {
    const RawQuantity &q = s.quantities[i];
    quantities.push_back({{"span", {q.begin, q.end}},
                          {"surface", q.surface},
                          {"value", ValueJson(s.values.at(i))}});
  }
  return {{"doc_id", s.doc_id},
          {"sentence_id", s.sentence_id},
          {"tokens", TokensJson(s.tokens)},
          {"quantities", quantities}};
}

SentenceRecord SentenceFrom(const json &j) {
  SentenceRecord s;
  s.doc_id = j.at("doc_id").get<std::string>();
  s.sentence_id = j.at("sentence_id").get<int>();
  s.tokens = TokensFrom(j.at("tokens"));
  for (const json &q : j.at("quantities")) {
    RawQuantity raw;
    raw.begin = q.at("span").at(0).get<size_t>();
    raw.end = q.at("span").at(1).get<size_t>();
    raw.surface = q.at("surface").get<std::string>();
    if (raw.begin >= raw.end || raw.end > s.tokens.size()) {
      throw Error(ErrorCode::kSpanOutOfBounds, "quantity span out of bounds");
    }
    s.quantities.push_back(std::move(raw));
    s.values.push_back(ValueFrom(q.at("value")));
  }
  return s;
}

json RecordJson(const QuantityRecord &r) {
  json segments = json::array();
  for (const Segment &seg : r.segments) segments.push_back({seg.begin, seg.end});
  return {{"record_id", r.record_id},
          {"description", r.description_text},
          {"segments", segments},
          {"value", ValueJson(r.value)},
          {"surface", r.surface},
          {"evidence", r.evidence},
          {"doc_id", r.doc_id},
          {"sentence_id", r.sentence_id},
          {"pivot", {r.pivot_begin, r.pivot_end}}};
}

QuantityRecord RecordFrom(const json &j) {
  QuantityRecord r;
  r.record_id = j.at("record_id").get<std::string>();
  r.description_text = j.at("description").get<std::string>();
  for (const json &seg : j.at("segments")) {
    r.segments.push_back({seg.at(0).get<size_t>(), seg.at(1).get<size_t>()});
  }
  r.value = ValueFrom(j.at("value"));
  r.surface = j.at("surface").get<std::string>();
  r.evidence = j.at("evidence").get<std::string>();
  r.doc_id = j.at("doc_id").get<std::string>();
  r.sentence_id = j.at("sentence_id").get<int>();
  r.pivot_begin = j.at("pivot").at(0).get<size_t>();
  r.pivot_end = j.at("pivot").at(1).get<size_t>();
  return r;
}

template <typename T, typename ToJson>
void SaveJsonl(const std::string &path, std::string_view schema,
               std::span<const T> items, ToJson to_json) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write file", path, 0);
  out << json{{"schema", schema}, {"version", kCorpusSchemaVersion}}.dump()
      << '\n';
  for (const T &item : items) out << to_json(item).dump() << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed", path, 0);
}

template <typename T, typename FromJson>
std::vector<T> LoadJsonl(const std::string &path, std::string_view schema,
                         FromJson from_json) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open file", path, 0);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::vector<T> items;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kParseError, std::string("invalid JSON: ") + e.what(),
                  path, line_no);
    }
    if (!have_header) {
      if (!j.is_object() || !j.contains("schema") || !j.contains("version") ||
          j["schema"] != schema) {
        throw Error(ErrorCode::kParseError,
                    "missing header line for schema " + std::string(schema),
                    path, line_no);
      }
      if (j["version"] != kCorpusSchemaVersion) {
        throw Error(ErrorCode::kSchemaVersionMismatch,
                    "unsupported schema version " + j["version"].dump(), path,
                    line_no);
      }
      have_header = true;
      continue;
    }
    try {
      items.push_back(from_json(j));
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kParseError, std::string("bad record: ") + e.what(),
                  path, line_no);
    } catch (const Error &e) {
      throw Error(e.code(), e.what(), path, line_no);
    }
  }
  if (!have_header) {
    throw Error(ErrorCode::kParseError, "empty file, header missing", path, 0);
  }
  return items;
}

json ReportJson(const BuildReport &r) {
  json failures = json::array();
  for (const auto &[doc, msg] : r.failures) {
    failures.push_back({{"doc_id", doc}, {"message", msg}});
  }
  return {{"version", kCorpusSchemaVersion},
          {"documents", r.documents},
          {"sentences", r.sentences},
          {"quantities", r.quantities},
          {"records", r.records},
          {"skipped_empty", r.skipped_empty},
          {"failures", failures}};
}

BuildReport ReportFrom(const json &j) {
  BuildReport r;
  r.documents = j.at("documents").get<size_t>();
  r.sentences = j.at("sentences").get<size_t>();
  r.quantities = j.at("quantities").get<size_t>();
  r.records = j.at("records").get<size_t>();
  r.skipped_empty = j.at("skipped_empty").get<size_t>();
  for (const json &f : j.at("failures")) {
    r.failures.emplace_back(f.at("doc_id").get<std::string>(),
                            f.at("message").get<std::string>());
  }
  return r;
}

}  // namespace

std::string SentenceRecord::id() const {
  return doc_id + ":" + std::to_string(sentence_id);
}

std::string QuantityRecord::sentence_key() const {
  return doc_id + ":" + std::to_string(sentence_id);
}

std::optional<size_t> Corpus::FindSentence(std::string_view key) const {
  for (size_t i = 0; i < sentences.size(); ++i) {
    if (sentences[i].id() == key) return i;
  }
  return std::nullopt;
}

std::string MakeEvidence(std::span<const Token> tokens, size_t begin,
                         size_t end, size_t window) {
  size_t from = begin > window ? begin - window : 0;
  size_t to = std::min(tokens.size(), end + window);
  return JoinTokens(tokens, from, to);
}

std::vector<QuantityRecord> BuildRecords(const SentenceRecord &sentence,
                                         const Tagger &tagger,
                                         size_t evidence_window,
                                         size_t *skipped_empty) {
  std::vector<QuantityRecord> out;
  for (size_t q = 0; q < sentence.quantities.size(); ++q) {
    const RawQuantity &raw = sentence.quantities[q];
    Description desc = ParseDescription(sentence.tokens, raw, tagger);
    if (desc.empty()) {
      if (skipped_empty != nullptr) ++*skipped_empty;
      continue;
    }
    QuantityRecord r;
    r.record_id = sentence.id() + ":" + std::to_string(q);
    r.description_text = desc.text;
    r.segments = std::move(desc.segments);
    r.value = sentence.values[q];
    r.surface = raw.surface;
    r.evidence =
        MakeEvidence(sentence.tokens, raw.begin, raw.end, evidence_window);
    r.doc_id = sentence.doc_id;
    r.sentence_id = sentence.sentence_id;
    r.pivot_begin = raw.begin;
    r.pivot_end = raw.end;
    out.push_back(std::move(r));
  }
  return out;
}

Corpus BuildCorpus(std::span<const Document> docs,
                   const QuantityExtractor &extractor, const Tagger &tagger,
                   const CorpusBuildOptions &options) {
  Corpus corpus;
  BuildReport &report = corpus.report;
  for (const Document &doc : docs) {
    ++report.documents;
    std::vector<SentenceRecord> sentences;
    std::vector<QuantityRecord> records;
    size_t quantities = 0;
    size_t skipped = 0;
    try {
      std::vector<std::string> raw_sentences =
          SplitSentences(doc.text, options.terminators);
      for (size_t s = 0; s < raw_sentences.size(); ++s) {
        std::vector<Token> tokens = MakeTokens(TokenizeWords(raw_sentences[s]));
        if (tokens.empty()) continue;
        std::vector<RawQuantity> found = extractor.Extract(tokens);
        if (found.empty()) continue;
        SentenceRecord sentence;
        sentence.doc_id = doc.doc_id;
        sentence.sentence_id = static_cast<int>(s);
        sentence.tokens = std::move(tokens);
        for (const RawQuantity &q : found) {
          sentence.values.push_back(extractor.Normalize(q.surface));
        }
        sentence.quantities = std::move(found);
        quantities += sentence.quantities.size();
        for (QuantityRecord &r :
             BuildRecords(sentence, tagger, options.evidence_window, &skipped)) {
          records.push_back(std::move(r));
        }
        sentences.push_back(std::move(sentence));
      }
    } catch (const Error &e) {
      report.failures.emplace_back(doc.doc_id, e.Describe());
      continue;
    }
    report.sentences += sentences.size();
    report.quantities += quantities;
    report.skipped_empty += skipped;
    report.records += records.size();
    for (SentenceRecord &s : sentences) corpus.sentences.push_back(std::move(s));
    for (QuantityRecord &r : records) corpus.records.push_back(std::move(r));
  }
  return corpus;
}

std::vector<Document> LoadDocuments(const std::string &dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIoError, "not a directory", dir, 0);
  }
  std::vector<fs::path> paths;
  for (const fs::directory_entry &entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Document> docs;
  for (const fs::path &p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open file", p.string(), 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    docs.push_back({p.stem().string(), ss.str()});
  }
  return docs;
}

std::vector<IndexedRecord> DescriptionDocuments(
    std::span<const QuantityRecord> records) {
  std::vector<IndexedRecord> out;
  out.reserve(records.size());
  for (const QuantityRecord &r : records) {
    out.push_back({r.record_id, r.description_text});
  }
  return out;
}

std::vector<IndexedRecord> SentenceDocuments(
    std::span<const SentenceRecord> sentences) {
  std::vector<IndexedRecord> out;
  out.reserve(sentences.size());
  for (const SentenceRecord &s : sentences) out.push_back({s.id(), s.text()});
  return out;
}

void SaveRecords(const std::string &path,
                 std::span<const QuantityRecord> records) {
  SaveJsonl(path, kRecordSchema, records, RecordJson);
}

std::vector<QuantityRecord> LoadRecords(const std::string &path) {
  return LoadJsonl<QuantityRecord>(path, kRecordSchema, RecordFrom);
}

void SaveSentences(const std::string &path,
                   std::span<const SentenceRecord> sentences) {
  SaveJsonl(path, kSentenceSchema, sentences, SentenceJson);
}

std::vector<SentenceRecord> LoadSentences(const std::string &path) {
  return LoadJsonl<SentenceRecord>(path, kSentenceSchema, SentenceFrom);
}

void SaveCorpus(const std::string &dir, const Corpus &corpus) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create directory", dir, 0);
  SaveSentences(dir + "/sentences.jsonl", corpus.sentences);
  SaveRecords(dir + "/records.jsonl", corpus.records);
  const std::string report_path = dir + "/build_report.json";
  std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write file", report_path, 0);
  out << ReportJson(corpus.report).dump(2) << '\n';
}

Corpus LoadCorpus(const std::string &dir) {
  Corpus corpus;
  corpus.sentences = LoadSentences(dir + "/sentences.jsonl");
  corpus.records = LoadRecords(dir + "/records.jsonl");
  const std::string report_path = dir + "/build_report.json";
  std::ifstream in(report_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open file", report_path, 0);
  try {
    json j = json::parse(in);
    if (j.at("version") != kCorpusSchemaVersion) {
      throw Error(ErrorCode::kSchemaVersionMismatch, "unsupported report version",
                  report_path, 1);
    }
    corpus.report = ReportFrom(j);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParseError, e.what(), report_path, 0);
  }
  return corpus;
}

std::string ValueToJson(const NormalizedValue &value) {
  return ValueJson(value).dump();
}

NormalizedValue ValueFromJson(std::string_view text) {
  try {
    return ValueFrom(json::parse(text));
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

}  // namespace quantret
