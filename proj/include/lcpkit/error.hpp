// Copyright 2026 The lcpkit Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lcpkit {

// Stable error classes; the CLI prints code_name() as the first token of its
// one-line diagnostic.
enum class ErrorCode {
  kSchemaSyntax,
  kSchemaDuplicate,
  kSchemaUndeclared,
  kSchemaSelfReference,
  kSchemaGroupSize,
  kSchemaInvalid,
  kInput,
  kDimension,
  kFormat,
  kIo,
  kConfig,
  kDivergence,
  kSampling,
  kCalibration,
};

std::string_view code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the constraint DSL parser. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t line, std::size_t column,
             const std::string& message);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace lcpkit
