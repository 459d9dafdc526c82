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

#ifndef QUANTRET_TOOLS_SERVICE_HTTP_SERVICE_H_
#define QUANTRET_TOOLS_SERVICE_HTTP_SERVICE_H_

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "quantret/config.h"
#include "quantret/pipeline.h"

namespace httplib {
class Server;
}

namespace quantret::service {

// JSON payloads shared by the HTTP service and `quantret search`.
std::string HitsToJson(std::string_view query, std::string_view method,
                       const std::vector<SearchHit> &hits);
std::string HitToJson(const SearchHit &hit);
// Tab-separated "rank score value evidence doc_id" lines.
std::string HitsToText(const std::vector<SearchHit> &hits);

// Read-only HTTP front end over a SearchEngine:
//   GET /search?q=&method=&k=   GET /record/{id}   GET /methods   GET /health
// Requests before SetEngine() get 503.
class HttpService {
 public:
  explicit HttpService(ServiceSettings settings);
  ~HttpService();

  HttpService(const HttpService &) = delete;
  HttpService &operator=(const HttpService &) = delete;

  void SetEngine(std::shared_ptr<const SearchEngine> engine);
  bool ready() const;

  // Blocks until Stop().
  bool Listen();
  // Starts on a background thread; returns the bound port or -1. Port 0
  // picks a free port.
  int Start();
  void Stop();

 private:
  void Routes();
  std::shared_ptr<const SearchEngine> engine() const;

  ServiceSettings settings_;
  std::unique_ptr<httplib::Server> server_;
  mutable std::mutex mu_;
  std::shared_ptr<const SearchEngine> engine_;
  std::thread thread_;
};

}  // namespace quantret::service

#endif  // QUANTRET_TOOLS_SERVICE_HTTP_SERVICE_H_
