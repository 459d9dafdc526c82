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

#include "quantret/error.h"

#include <utility>

namespace quantret {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kMalformedSurface: return "malformed_surface";
    case ErrorCode::kSpanOutOfBounds: return "span_out_of_bounds";
    case ErrorCode::kIllegalTagTransition: return "illegal_tag_transition";
    case ErrorCode::kEmptyDataset: return "empty_dataset";
    case ErrorCode::kIoError: return "io_error";
    case ErrorCode::kParseError: return "parse_error";
    case ErrorCode::kSchemaVersionMismatch: return "schema_version_mismatch";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kIndexCorpusMismatch: return "index_corpus_mismatch";
    case ErrorCode::kDomainError: return "domain_error";
    case ErrorCode::kZeroVector: return "zero_vector";
    case ErrorCode::kEmptyPairSet: return "empty_pair_set";
    case ErrorCode::kMethodQueryMismatch: return "method_query_mismatch";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kUnknownMethod: return "unknown_method";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kUnsupported: return "unsupported";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(message), code_(code) {}

Error::Error(ErrorCode code, const std::string &message, std::string file,
             int line)
    : std::runtime_error(message),
      code_(code),
      file_(std::move(file)),
      line_(line) {}

std::string Error::Describe() const {
  std::string out = "error code=";
  out += ErrorCodeName(code_);
  if (!file_.empty()) out += " file=" + file_;
  if (line_ > 0) out += " line=" + std::to_string(line_);
  out += " message=\"";
  for (char c : std::string_view(what())) {
    if (c == '"' || c == '\\') out += '\\';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  out += '"';
  return out;
}

}  // namespace quantret
