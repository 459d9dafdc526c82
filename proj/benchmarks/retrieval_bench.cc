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


#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "quantret/bm25.h"
#include "quantret/corpus.h"
#include "quantret/ranker.h"
#include "quantret/synthetic.h"
#include "quantret/tagger.h"
#include "quantret/weak_supervision.h"

namespace quantret {
namespace {

// Records from a synthetic corpus with roughly `facts` facts.
std::vector<QuantityRecord> Records(size_t facts) {
  SyntheticCorpusSpec spec;
  spec.facts = facts;
  spec.seed = 3;
  SyntheticCorpus synth = GenerateSyntheticCorpus(spec);
  return BuildCorpus(synth.documents, QuantityExtractor(), RuleBaselineTagger()).records;
}

void BM_Bm25Build(benchmark::State &state) {
  std::vector<IndexedRecord> docs = DescriptionDocuments(Records(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(InvertedIndex::Build(docs));
  }
  state.SetItemsProcessed(state.iterations() * docs.size());
}
BENCHMARK(BM_Bm25Build)->Arg(200)->Arg(2000);

void BM_Bm25Search(benchmark::State &state) {
  std::vector<QuantityRecord> records = Records(state.range(0));
  InvertedIndex index = InvertedIndex::Build(DescriptionDocuments(records));
  size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.Search(records[q++ % records.size()].description_text, 10));
  }
}
BENCHMARK(BM_Bm25Search)->Arg(200)->Arg(2000);

void BM_MinePairs(benchmark::State &state) {
  std::vector<QuantityRecord> records = Records(state.range(0));
  InvertedIndex index = InvertedIndex::Build(DescriptionDocuments(records));
  for (auto _ : state) {
    benchmark::DoNotOptimize(MinePairs(records, index, {.k = 10}));
  }
  state.SetItemsProcessed(state.iterations() * records.size());
}
BENCHMARK(BM_MinePairs)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_DenseSearch(benchmark::State &state) {
  std::vector<QuantityRecord> records = Records(state.range(0));
  HashedEncoder encoder = HashedEncoder::Initialize({});
  std::vector<std::string> ids, texts;
  for (const QuantityRecord &r : records) {
    ids.push_back(r.record_id);
    texts.push_back(r.description_text);
  }
  DenseIndex index = DenseIndex::Build(ids, texts, encoder);
  EmbeddingVector query = encoder.Encode(texts.front());
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.Search(query, 10));
  }
  state.SetItemsProcessed(state.iterations() * index.size());
}
BENCHMARK(BM_DenseSearch)->Arg(200)->Arg(2000);

void BM_Encode(benchmark::State &state) {
  HashedEncoder encoder = HashedEncoder::Initialize({});
  for (auto _ : state) {
    benchmark::DoNotOptimize(encoder.Encode("net profit of Borealis Holdings in 2021"));
  }
}
BENCHMARK(BM_Encode);

}  // namespace
}  // namespace quantret
