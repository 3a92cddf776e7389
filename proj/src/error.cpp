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

#include "lcpkit/error.hpp"

namespace lcpkit {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kSchemaSyntax: return "E_SCHEMA_SYNTAX";
    case ErrorCode::kSchemaDuplicate: return "E_SCHEMA_DUPLICATE";
    case ErrorCode::kSchemaUndeclared: return "E_SCHEMA_UNDECLARED";
    case ErrorCode::kSchemaSelfReference: return "E_SCHEMA_SELF_REFERENCE";
    case ErrorCode::kSchemaGroupSize: return "E_SCHEMA_GROUP_SIZE";
    case ErrorCode::kSchemaInvalid: return "E_SCHEMA_INVALID";
    case ErrorCode::kInput: return "E_INPUT";
    case ErrorCode::kDimension: return "E_DIMENSION";
    case ErrorCode::kFormat: return "E_FORMAT";
    case ErrorCode::kIo: return "E_IO";
    case ErrorCode::kConfig: return "E_CONFIG";
    case ErrorCode::kDivergence: return "E_DIVERGENCE";
    case ErrorCode::kSampling: return "E_SAMPLING";
    case ErrorCode::kCalibration: return "E_CALIBRATION";
  }
  return "E_UNKNOWN";
}

ParseError::ParseError(ErrorCode code, std::size_t line, std::size_t column,
                       const std::string& message)
    : Error(code, "line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

}  // namespace lcpkit
