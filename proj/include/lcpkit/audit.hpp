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

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcpkit/matrix.hpp"
#include "lcpkit/schema.hpp"

namespace lcpkit {

enum class Status { kConsistent, kIncomplete, kImpossible };

std::string_view status_name(Status s) noexcept;

struct ConsistencyVerdict {
  Status status = Status::kConsistent;
  // Unordered pairs (lower index first), each reported once, ascending.
  std::vector<std::pair<std::size_t, std::size_t>> violated_exclusions;
  // Subject attribute of every violated dependency rule, in rule order.
  std::vector<std::size_t> violated_dependencies;
  // Parallel to violated_dependencies: index into dependency_rules().
  std::vector<std::size_t> violated_dependency_rules;
  // Names of exhaustive groups without a positive member, in schema order.
  std::vector<std::string> empty_groups;

  bool operator==(const ConsistencyVerdict&) const = default;
};

struct AuditReport {
  std::size_t n_total = 0;
  std::size_t n_consistent = 0;
  std::size_t n_incomplete = 0;
  std::size_t n_impossible = 0;
  double failure_ratio = 0.0;
  // Violation count per rule key: "exclude:a|b", "require:a->b|c",
  // "exhaustive:group". Every rule of the schema is present.
  std::map<std::string, std::size_t> per_rule_counts;

  bool operator==(const AuditReport&) const = default;
};

// (n_incomplete + n_impossible) / n_total, or 0 for an empty dataset.
double failure_ratio(std::size_t n_incomplete, std::size_t n_impossible,
                     std::size_t n_total);

// Entry = 1 iff score > threshold. Throws Error(kInput) naming the first
// non-finite entry.
BinaryMatrix binarize(const ScoreMatrix& scores, double threshold);

ConsistencyVerdict check_vector(const AttributeSchema& schema,
                                std::span<const std::uint8_t> row);

// Audits already-binary predictions (e.g. after compensation).
AuditReport audit_binary(const AttributeSchema& schema,
                         const BinaryMatrix& preds, unsigned threads = 1);

AuditReport audit_dataset(const AttributeSchema& schema,
                          const ScoreMatrix& scores, double threshold,
                          unsigned threads = 1);

std::string audit_report_json(const AuditReport& report, int indent = 2);

}  // namespace lcpkit
