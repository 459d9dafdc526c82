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

#include "service/http_service.h"

#include <memory>
#include <string>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "test_util.h"

namespace quantret::service {
namespace {

using nlohmann::json;

std::shared_ptr<const SearchEngine> FixtureEngine() {
  PerceptronTagger tagger = PerceptronTagger::Train(
      LoadLabeledExamples(testing::FixturePath("parser_train.jsonl")), 20, 1);
  Corpus corpus = BuildCorpus(LoadDocuments(testing::FixturePath("docs")),
                              QuantityExtractor(), tagger);
  PipelineConfig config;
  config.encoder = {.buckets = 1024, .dim = 16, .seed = 1};
  return std::make_shared<const SearchEngine>(std::move(corpus), config, EngineModels{});
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    service_ = std::make_unique<HttpService>(ServiceSettings{"127.0.0.1", 0, "*"});
    port_ = service_->Start();
    ASSERT_GT(port_, 0);
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override { service_->Stop(); }

  json GetJson(const std::string &path, int expected_status) {
    httplib::Result res = client_->Get(path);
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expected_status) << path << " " << res->body;
    return json::parse(res->body);
  }

  std::unique_ptr<HttpService> service_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

TEST_F(ServiceTest, HealthReportsLoadingThenOk) {
  EXPECT_FALSE(service_->ready());
  EXPECT_EQ(GetJson("/health", 503)["status"], "loading");
  GetJson("/search?q=revenue", 503);
  service_->SetEngine(FixtureEngine());
  EXPECT_TRUE(service_->ready());
  EXPECT_EQ(GetJson("/health", 200)["status"], "ok");
}

TEST_F(ServiceTest, MethodsListsAllFive) {
  service_->SetEngine(FixtureEngine());
  json body = GetJson("/methods", 200);
  ASSERT_EQ(body["methods"].size(), 5u);
  size_t available = 0;
  for (const json &m : body["methods"]) available += m["available"].get<bool>();
  EXPECT_EQ(available, 3u);
  EXPECT_EQ(body["methods"][1]["id"], "cq-bm25");
}

TEST_F(ServiceTest, SearchMatchesEngine) {
  std::shared_ptr<const SearchEngine> engine = FixtureEngine();
  service_->SetEngine(engine);
  json body = GetJson("/search?q=Acme%20revenue%202020&k=3", 200);
  EXPECT_EQ(body["query"], "Acme revenue 2020");
  EXPECT_EQ(body["method"], "cq-bm25");
  std::vector<SearchHit> want = engine->Search("cq-bm25", "Acme revenue 2020", 3);
  ASSERT_EQ(body["hits"].size(), want.size());
  for (size_t i = 0; i < want.size(); ++i) {
    const json &h = body["hits"][i];
    EXPECT_EQ(h["rank"], i + 1);
    EXPECT_EQ(h["record_id"], want[i].record_id);
    EXPECT_NEAR(h["score"].get<double>(), want[i].score, 1e-12);
    EXPECT_EQ(h["value"], want[i].value);
    EXPECT_EQ(h["description"], want[i].description);
    EXPECT_EQ(h["evidence"], want[i].evidence);
    EXPECT_EQ(h["doc_id"], want[i].doc_id);
    EXPECT_EQ(h["sentence_id"], want[i].sentence_id);
  }
  EXPECT_EQ(json::parse(HitsToJson("Acme revenue 2020", "cq-bm25", want)), body);

  json sentences = GetJson("/search?q=market%20share&method=cs-bm25", 200);
  ASSERT_FALSE(sentences["hits"].empty());
  EXPECT_EQ(sentences["hits"][0]["description"], "");
}

TEST_F(ServiceTest, ErrorStatuses) {
  service_->SetEngine(FixtureEngine());
  json missing = GetJson("/search", 400);
  EXPECT_EQ(missing["error"], "invalid_argument");
  EXPECT_FALSE(missing["message"].get<std::string>().empty());
  EXPECT_EQ(GetJson("/search?q=x&method=cq-tfidf", 400)["error"], "unknown_method");
  EXPECT_EQ(GetJson("/search?q=x&method=cq-dense-ws", 400)["error"], "unknown_method");
  GetJson("/search?q=x&k=0", 400);
  GetJson("/search?q=x&k=abc", 400);
  GetJson("/search?q=x&k=1001", 400);
  EXPECT_EQ(GetJson("/record/doc_z:9:9", 404)["error"], "not_found");
}

TEST_F(ServiceTest, RecordEndpoint) {
  std::shared_ptr<const SearchEngine> engine = FixtureEngine();
  service_->SetEngine(engine);
  const QuantityRecord &r = engine->corpus().records.front();
  json body = GetJson("/record/" + r.record_id, 200);
  EXPECT_EQ(body["record_id"], r.record_id);
  EXPECT_EQ(body["description"], r.description_text);
  EXPECT_EQ(body["normalized"], r.value.DecimalString());
  EXPECT_EQ(body["segments"].size(), r.segments.size());
  EXPECT_FALSE(body.contains("rank"));
  EXPECT_FALSE(body.contains("score"));
}

TEST_F(ServiceTest, CorsHeaders) {
  service_->SetEngine(FixtureEngine());
  httplib::Result res = client_->Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  httplib::Result pre = client_->Options("/search");
  ASSERT_TRUE(pre);
  EXPECT_EQ(pre->status, 204);
  EXPECT_NE(pre->get_header_value("Access-Control-Allow-Methods").find("GET"),
            std::string::npos);
}

TEST(HitsToTextTest, TabSeparatedLines) {
  SearchHit hit;
  hit.rank = 2;
  hit.score = 1.5;
  hit.value = "5 yuan";
  hit.evidence = "Acme made 5 yuan";
  hit.doc_id = "d1";
  EXPECT_EQ(HitsToText({hit}), "2\t1.500000\t5 yuan\tAcme made 5 yuan\td1\n");
  EXPECT_EQ(HitsToText({}), "");
}

}  // namespace
}  // namespace quantret::service
