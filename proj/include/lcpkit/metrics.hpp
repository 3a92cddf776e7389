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

#include <optional>
#include <string>
#include <vector>

#include "lcpkit/matrix.hpp"
#include "lcpkit/schema.hpp"

namespace lcpkit {

enum class MetricsMode { kPlain, kConsistencyEnforced };

struct AttributeAccuracy {
  std::string name;
  std::optional<double> accuracy;           // empty when there are no rows
  std::optional<double> positive_accuracy;  // rows with label 1
  std::optional<double> negative_accuracy;  // rows with label 0
};

struct MetricsReport {
  MetricsMode mode = MetricsMode::kPlain;
  std::vector<AttributeAccuracy> attributes;
  // Unweighted means over attributes with a non-empty denominator.
  double acc_avg = 0.0;
  double acc_avg_p = 0.0;
  double acc_avg_n = 0.0;
  std::size_t n_rows = 0;
  std::size_t n_invalidated_rows = 0;
};

// Column names default to "attr<k>" when `names` is empty.
MetricsReport attribute_accuracy(const BinaryMatrix& preds,
                                 const BinaryMatrix& labels,
                                 const std::vector<std::string>& names = {});

// Rows whose prediction is not consistent under the schema count as wrong on
// every attribute. This whole-row reading is an interpretation; a per-group
// penalty would be the main alternative.
MetricsReport consistency_enforced_accuracy(const AttributeSchema& schema,
                                            const BinaryMatrix& preds,
                                            const BinaryMatrix& labels);

std::string metrics_json(const std::vector<MetricsReport>& reports,
                         int indent = 2);

// Aligned text table, one line per (label, report).
std::string metrics_table(
    const std::vector<std::pair<std::string, MetricsReport>>& rows);

}  // namespace lcpkit
