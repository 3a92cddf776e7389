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

#include <string>
#include <string_view>
#include <vector>

#include "lcpkit/matrix.hpp"
#include "lcpkit/schema.hpp"

namespace lcpkit::io {

// Comma-separated table: header `id,<col1>,...,<colK>`, one row per image.
struct CsvTable {
  std::vector<std::string> columns;  // without the leading id column
  ScoreMatrix data;
};

CsvTable parse_csv(std::string_view text, std::string_view origin = "<csv>");
CsvTable read_csv(const std::string& path);

// Reads a score file whose header names are a permutation of the schema's
// attributes; columns are reordered to schema order.
ScoreMatrix read_scores(const std::string& path, const AttributeSchema& schema);
BinaryMatrix read_binary(const std::string& path,
                         const AttributeSchema& schema);

std::string format_csv(const std::vector<std::string>& columns,
                       const ScoreMatrix& data);
std::string format_csv(const std::vector<std::string>& columns,
                       const BinaryMatrix& data);

// Shortest decimal text that round-trips.
std::string format_double(double x);

std::string read_file(const std::string& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace lcpkit::io
