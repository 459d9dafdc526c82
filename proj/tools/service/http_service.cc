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

#include <cstdio>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "quantret/error.h"

namespace quantret::service {
namespace {

using nlohmann::json;

json HitJson(const SearchHit &h) {
  return {{"rank", h.rank},
          {"score", h.score},
          {"value", h.value},
          {"description", h.description},
          {"evidence", h.evidence},
          {"doc_id", h.doc_id},
          {"sentence_id", h.sentence_id},
          {"record_id", h.record_id}};
}

void SendJson(httplib::Response &res, int status, const json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void SendError(httplib::Response &res, int status, const Error &e) {
  SendJson(res, status,
           {{"error", std::string(ErrorCodeName(e.code()))}, {"message", e.what()}});
}

int StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kUnknownMethod:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnsupported:
      return 400;
    default:
      return 500;
  }
}

}  // namespace

std::string HitToJson(const SearchHit &hit) { return HitJson(hit).dump(); }

std::string HitsToJson(std::string_view query, std::string_view method,
                       const std::vector<SearchHit> &hits) {
  json arr = json::array();
  for (const SearchHit &h : hits) arr.push_back(HitJson(h));
  return json{{"query", query}, {"method", method}, {"hits", arr}}.dump();
}

std::string HitsToText(const std::vector<SearchHit> &hits) {
  std::ostringstream out;
  char score[32];
  for (const SearchHit &h : hits) {
    std::snprintf(score, sizeof(score), "%.6f", h.score);
    out << h.rank << '\t' << score << '\t' << h.value << '\t' << h.evidence << '\t'
        << h.doc_id << '\n';
  }
  return out.str();
}

HttpService::HttpService(ServiceSettings settings)
    : settings_(std::move(settings)), server_(std::make_unique<httplib::Server>()) {
  Routes();
}

HttpService::~HttpService() { Stop(); }

void HttpService::SetEngine(std::shared_ptr<const SearchEngine> engine) {
  std::lock_guard<std::mutex> lock(mu_);
  engine_ = std::move(engine);
}

bool HttpService::ready() const { return engine() != nullptr; }

std::shared_ptr<const SearchEngine> HttpService::engine() const {
  std::lock_guard<std::mutex> lock(mu_);
  return engine_;
}

void HttpService::Routes() {
  server_->set_default_headers(
      {{"Access-Control-Allow-Origin", settings_.cors_origin}});
  server_->Options(R"(.*)", [](const httplib::Request &, httplib::Response &res) {
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  server_->Get("/health", [this](const httplib::Request &, httplib::Response &res) {
    if (!ready()) {
      SendJson(res, 503, {{"status", "loading"}});
      return;
    }
    SendJson(res, 200, {{"status", "ok"}});
  });

  server_->Get("/methods", [this](const httplib::Request &, httplib::Response &res) {
    std::shared_ptr<const SearchEngine> e = engine();
    if (!e) {
      SendJson(res, 503, {{"status", "loading"}});
      return;
    }
    json methods = json::array();
    for (const MethodInfo &m : MethodCatalog()) {
      methods.push_back(
          {{"id", m.id}, {"summary", m.summary}, {"available", e->Available(m.id)}});
    }
    SendJson(res, 200, {{"methods", methods}});
  });

  server_->Get("/search", [this](const httplib::Request &req, httplib::Response &res) {
    std::shared_ptr<const SearchEngine> e = engine();
    if (!e) {
      SendJson(res, 503, {{"status", "loading"}});
      return;
    }
    try {
      if (!req.has_param("q") || req.get_param_value("q").empty()) {
        throw Error(ErrorCode::kInvalidArgument, "missing query parameter q");
      }
      const std::string q = req.get_param_value("q");
      const std::string method =
          req.has_param("method") ? req.get_param_value("method") : std::string(kCqBm25);
      size_t k = 10;
      if (req.has_param("k")) {
        const std::string ks = req.get_param_value("k");
        char *end = nullptr;
        long v = std::strtol(ks.c_str(), &end, 10);
        if (ks.empty() || *end != '\0' || v < 1 || v > 1000) {
          throw Error(ErrorCode::kInvalidArgument, "k must be an integer in [1, 1000]");
        }
        k = static_cast<size_t>(v);
      }
      res.status = 200;
      res.set_content(HitsToJson(q, method, e->Search(method, q, k)),
                      "application/json; charset=utf-8");
    } catch (const Error &err) {
      SendError(res, StatusFor(err.code()), err);
    }
  });

  server_->Get(R"(/record/(.+))", [this](const httplib::Request &req,
                                          httplib::Response &res) {
    std::shared_ptr<const SearchEngine> e = engine();
    if (!e) {
      SendJson(res, 503, {{"status", "loading"}});
      return;
    }
    const std::string id = httplib::detail::decode_url(req.matches[1], false);
    const QuantityRecord *r = e->FindRecord(id);
    if (r == nullptr) {
      SendError(res, 404, Error(ErrorCode::kNotFound, "unknown record id " + id));
      return;
    }
    json body = HitJson(e->RecordHit(*r));
    body.erase("rank");
    body.erase("score");
    json segments = json::array();
    for (const Segment &s : r->segments) segments.push_back({s.begin, s.end});
    body["segments"] = segments;
    body["normalized"] = r->value.DecimalString();
    body["kind"] = std::string(KindName(r->value.kind));
    SendJson(res, 200, body);
  });
}

bool HttpService::Listen() {
  return server_->listen(settings_.host, settings_.port);
}

int HttpService::Start() {
  int port = settings_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(settings_.host);
  } else if (!server_->bind_to_port(settings_.host, port)) {
    return -1;
  }
  if (port < 0) return -1;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void HttpService::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace quantret::service
