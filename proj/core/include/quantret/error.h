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

#ifndef QUANTRET_ERROR_H_
#define QUANTRET_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace quantret {

enum class ErrorCode {
  kInvalidArgument,
  kMalformedSurface,
  kSpanOutOfBounds,
  kIllegalTagTransition,
  kEmptyDataset,
  kIoError,
  kParseError,
  kSchemaVersionMismatch,
  kDuplicateId,
  kIndexCorpusMismatch,
  kDomainError,
  kZeroVector,
  kEmptyPairSet,
  kMethodQueryMismatch,
  kInvalidConfig,
  kUnknownMethod,
  kNotFound,
  kUnsupported,
};

// Stable snake_case name used in machine-parseable error lines.
std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception. Data errors
// carry the offending file and 1-based line when they are known.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message);
  Error(ErrorCode code, const std::string &message, std::string file,
        int line);

  ErrorCode code() const { return code_; }
  const std::string &file() const { return file_; }
  int line() const { return line_; }

  // Single line: `error code=<name> [file=<path>] [line=<n>] message="..."`.
  std::string Describe() const;

 private:
  ErrorCode code_;
  std::string file_;
  int line_ = 0;
};

}  // namespace quantret

#endif  // QUANTRET_ERROR_H_
