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

#include "lcpkit/compensate.hpp"

#include <string>

#include "lcpkit/audit.hpp"

namespace lcpkit {

void compensate_in_place(const AttributeSchema& schema,
                         std::span<const double> scores,
                         std::span<std::uint8_t> row) {
  if (scores.size() != schema.size() || row.size() != schema.size()) {
    throw Error(ErrorCode::kDimension,
                "compensation expects " + std::to_string(schema.size()) +
                    " scores and labels, got " + std::to_string(scores.size()) +
                    " and " + std::to_string(row.size()));
  }
  for (const auto& g : schema.exhaustive_groups()) {
    bool filled = false;
    std::size_t best = g.members.front();
    for (auto m : g.members) {
      if (row[m]) {
        filled = true;
        break;
      }
      if (scores[m] > scores[best] ||
          (scores[m] == scores[best] && m < best)) {
        best = m;
      }
    }
    if (!filled) row[best] = 1;
  }
}

std::vector<std::uint8_t> compensate_vector(const AttributeSchema& schema,
                                            std::span<const double> scores,
                                            std::span<const std::uint8_t> row) {
  std::vector<std::uint8_t> out(row.begin(), row.end());
  compensate_in_place(schema, scores, out);
  return out;
}

BinaryMatrix compensate_dataset(const AttributeSchema& schema,
                                const ScoreMatrix& scores, double threshold) {
  if (scores.rows() > 0 && scores.cols() != schema.size()) {
    throw Error(ErrorCode::kDimension,
                "score width " + std::to_string(scores.cols()) +
                    " does not match schema '" + schema.name() + "'");
  }
  auto out = binarize(scores, threshold);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    compensate_in_place(schema, scores.values.row(r), out.values.row(r));
  }
  return out;
}

}  // namespace lcpkit
