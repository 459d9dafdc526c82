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

#include "quantret/config.h"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "quantret/error.h"

namespace quantret {
namespace {

using nlohmann::json;

// Reads one JSON object, rejecting keys without a handler.
class Section {
 public:
  Section(const json &obj, std::string name, const std::string &source)
      : obj_(obj), name_(std::move(name)), source_(source) {
    if (!obj_.is_object()) Fail(name_.empty() ? "config" : name_, "must be an object");
  }

  template <typename T>
  Section &Get(const std::string &key, T &out) {
    seen_.push_back(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return *this;
    try {
      out = it->template get<T>();
    } catch (const json::exception &e) {
      Fail(Path(key), std::string("wrong type: ") + e.what());
    }
    return *this;
  }

  Section &Optional(const std::string &key, std::optional<double> &out) {
    seen_.push_back(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return *this;
    if (it->is_null()) {
      out.reset();
    } else if (it->is_number()) {
      out = it->get<double>();
    } else {
      Fail(Path(key), "must be a number or null");
    }
    return *this;
  }

  Section &Char(const std::string &key, char &out) {
    std::string s(1, out);
    Get(key, s);
    if (s.size() != 1) Fail(Path(key), "must be a single character");
    out = s[0];
    return *this;
  }

  Section Child(const std::string &key) {
    seen_.push_back(key);
    static const json kEmpty = json::object();
    auto it = obj_.find(key);
    return Section(it == obj_.end() ? kEmpty : *it, Path(key), source_);
  }

  void Done() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
        Fail(Path(it.key()), "unknown key");
      }
    }
  }

  [[noreturn]] void Fail(const std::string &key, const std::string &why) const {
    throw Error(ErrorCode::kInvalidConfig, key + ": " + why, source_, 0);
  }

  std::string Path(const std::string &key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

 private:
  const json &obj_;
  std::string name_;
  const std::string &source_;
  std::vector<std::string> seen_;
};

json Serialize(const PipelineConfig &c) {
  json min_score = c.mining.min_score ? json(*c.mining.min_score) : json(nullptr);
  return {
      {"tokenizer",
       {{"lowercase", c.tokenizer.lowercase}, {"cjk_bigrams", c.tokenizer.cjk_bigrams}}},
      {"terminators", c.terminators},
      {"extractor",
       {{"thousands_separator", std::string(1, c.extractor.format.thousands_separator)},
        {"decimal_mark", std::string(1, c.extractor.format.decimal_mark)},
        {"exclude_years", c.extractor.format.exclude_years},
        {"year_min", c.extractor.format.year_min},
        {"year_max", c.extractor.format.year_max},
        {"magnitude_lexicon", c.extractor.magnitude_lexicon},
        {"unit_lexicon", c.extractor.unit_lexicon}}},
      {"bm25", {{"k1", c.bm25.k1}, {"b", c.bm25.b}}},
      {"mining",
       {{"k", c.mining.k},
        {"min_score", min_score},
        {"filter_queries", c.mining.filter.enabled},
        {"min_segments", c.mining.filter.min_segments},
        {"min_sig_digits", c.mining.filter.min_sig_digits}}},
      {"encoder",
       {{"buckets", c.encoder.buckets}, {"dim", c.encoder.dim}, {"seed", c.encoder.seed}}},
      {"contrastive",
       {{"margin", c.contrastive.margin},
        {"max_negatives", c.contrastive.max_negatives},
        {"epochs", c.contrastive.epochs},
        {"learning_rate", c.contrastive.learning_rate},
        {"seed", c.contrastive.seed}}},
      {"tagger", {{"kind", c.tagger.kind}, {"epochs", c.tagger.epochs}}},
      {"evidence_window", c.evidence_window},
      {"seed", c.seed},
      {"eval",
       {{"train_fraction", c.eval.train_fraction},
        {"cutoff", c.eval.cutoff},
        {"max_queries", c.eval.max_queries},
        {"filter_queries", c.eval.query_filter.enabled},
        {"min_segments", c.eval.query_filter.min_segments},
        {"min_sig_digits", c.eval.query_filter.min_sig_digits}}},
      {"paths",
       {{"corpus", c.paths.corpus},
        {"tagger", c.paths.tagger},
        {"ranker", c.paths.ranker},
        {"embeddings", c.paths.embeddings},
        {"pairs", c.paths.pairs},
        {"labels", c.paths.labels}}},
      {"service",
       {{"host", c.service.host},
        {"port", c.service.port},
        {"cors_origin", c.service.cors_origin}}},
  };
}

void Validate(const PipelineConfig &c, const std::string &source) {
  auto fail = [&](const std::string &what) {
    throw Error(ErrorCode::kInvalidConfig, what, source, 0);
  };
  if (!(c.bm25.k1 >= 0)) fail("bm25.k1 must be >= 0");
  if (!(c.bm25.b >= 0 && c.bm25.b <= 1)) fail("bm25.b must lie in [0, 1]");
  if (c.mining.k < 1) fail("mining.k must be >= 1");
  if (c.encoder.buckets == 0 || c.encoder.dim == 0) fail("encoder sizes must be > 0");
  if (!(c.contrastive.margin > 0 && c.contrastive.margin <= 1)) {
    fail("contrastive.margin must lie in (0, 1]");
  }
  if (c.contrastive.max_negatives < 1) fail("contrastive.max_negatives must be >= 1");
  if (c.contrastive.epochs < 0) fail("contrastive.epochs must be >= 0");
  if (!(c.contrastive.learning_rate > 0)) fail("contrastive.learning_rate must be > 0");
  if (c.tagger.kind != "perceptron" && c.tagger.kind != "rule") {
    fail("tagger.kind must be perceptron or rule");
  }
  if (c.tagger.epochs < 0) fail("tagger.epochs must be >= 0");
  if (!(c.eval.train_fraction > 0 && c.eval.train_fraction < 1)) {
    fail("eval.train_fraction must lie in (0, 1)");
  }
  if (c.eval.cutoff < 1) fail("eval.cutoff must be >= 1");
  if (c.service.port < 1 || c.service.port > 65535) fail("service.port out of range");
  if (c.terminators.empty()) fail("terminators must not be empty");
  const NumberFormat &f = c.extractor.format;
  if (f.thousands_separator == f.decimal_mark) {
    fail("extractor separators must differ");
  }
  if (std::isdigit(static_cast<unsigned char>(f.thousands_separator)) ||
      std::isdigit(static_cast<unsigned char>(f.decimal_mark))) {
    fail("extractor separators must not be digits");
  }
}

PipelineConfig FromJson(const json &root, const std::string &source) {
  PipelineConfig c;
  Section top(root, "", source);
  top.Child("tokenizer")
      .Get("lowercase", c.tokenizer.lowercase)
      .Get("cjk_bigrams", c.tokenizer.cjk_bigrams)
      .Done();
  top.Get("terminators", c.terminators);
  top.Child("extractor")
      .Char("thousands_separator", c.extractor.format.thousands_separator)
      .Char("decimal_mark", c.extractor.format.decimal_mark)
      .Get("exclude_years", c.extractor.format.exclude_years)
      .Get("year_min", c.extractor.format.year_min)
      .Get("year_max", c.extractor.format.year_max)
      .Get("magnitude_lexicon", c.extractor.magnitude_lexicon)
      .Get("unit_lexicon", c.extractor.unit_lexicon)
      .Done();
  top.Child("bm25").Get("k1", c.bm25.k1).Get("b", c.bm25.b).Done();
  top.Child("mining")
      .Get("k", c.mining.k)
      .Optional("min_score", c.mining.min_score)
      .Get("filter_queries", c.mining.filter.enabled)
      .Get("min_segments", c.mining.filter.min_segments)
      .Get("min_sig_digits", c.mining.filter.min_sig_digits)
      .Done();
  top.Child("encoder")
      .Get("buckets", c.encoder.buckets)
      .Get("dim", c.encoder.dim)
      .Get("seed", c.encoder.seed)
      .Done();
  top.Child("contrastive")
      .Get("margin", c.contrastive.margin)
      .Get("max_negatives", c.contrastive.max_negatives)
      .Get("epochs", c.contrastive.epochs)
      .Get("learning_rate", c.contrastive.learning_rate)
      .Get("seed", c.contrastive.seed)
      .Done();
  top.Child("tagger").Get("kind", c.tagger.kind).Get("epochs", c.tagger.epochs).Done();
  top.Get("evidence_window", c.evidence_window);
  top.Get("seed", c.seed);
  top.Child("eval")
      .Get("train_fraction", c.eval.train_fraction)
      .Get("cutoff", c.eval.cutoff)
      .Get("max_queries", c.eval.max_queries)
      .Get("filter_queries", c.eval.query_filter.enabled)
      .Get("min_segments", c.eval.query_filter.min_segments)
      .Get("min_sig_digits", c.eval.query_filter.min_sig_digits)
      .Done();
  top.Child("paths")
      .Get("corpus", c.paths.corpus)
      .Get("tagger", c.paths.tagger)
      .Get("ranker", c.paths.ranker)
      .Get("embeddings", c.paths.embeddings)
      .Get("pairs", c.paths.pairs)
      .Get("labels", c.paths.labels)
      .Done();
  top.Child("service")
      .Get("host", c.service.host)
      .Get("port", c.service.port)
      .Get("cors_origin", c.service.cors_origin)
      .Done();
  top.Done();
  Validate(c, source);
  return c;
}

std::string EnvName(const std::string &section, const std::string &key) {
  std::string name = "QUANTRET_";
  for (char ch : section.empty() ? key : section + "_" + key) {
    name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  }
  return name;
}

json EnvValue(const std::string &text) {
  json parsed = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) return json(text);
  return parsed;
}

}  // namespace

QuantityExtractor PipelineConfig::MakeExtractor() const {
  MagnitudeLexicon magnitudes = extractor.magnitude_lexicon.empty()
                                    ? MagnitudeLexicon::Default()
                                    : MagnitudeLexicon::LoadFile(extractor.magnitude_lexicon);
  UnitLexicon units = extractor.unit_lexicon.empty()
                          ? UnitLexicon::Default()
                          : UnitLexicon::LoadFile(extractor.unit_lexicon);
  return QuantityExtractor(std::move(magnitudes), std::move(units), extractor.format);
}

std::string PipelineConfig::ToJson() const { return Serialize(*this).dump(2); }

PipelineConfig ParseConfig(std::string_view json_text, const std::string &source) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParseError, e.what(), source, 0);
  }
  return FromJson(root, source);
}

PipelineConfig LoadConfig(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open file", path, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str(), path);
}

PipelineConfig ApplyEnvOverrides(const PipelineConfig &config,
                                 const EnvLookup &lookup) {
  json root = Serialize(config);
  bool changed = false;
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (it->is_object()) {
      for (auto kv = it->begin(); kv != it->end(); ++kv) {
        if (auto v = lookup(EnvName(it.key(), kv.key()))) {
          *kv = EnvValue(*v);
          changed = true;
        }
      }
    } else if (auto v = lookup(EnvName("", it.key()))) {
      *it = EnvValue(*v);
      changed = true;
    }
  }
  if (!changed) return config;
  return FromJson(root, "<environment>");
}

EnvLookup ProcessEnv() {
  return [](const std::string &name) -> std::optional<std::string> {
    const char *v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

}  // namespace quantret
