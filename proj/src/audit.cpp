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

#include "lcpkit/audit.hpp"

#include <algorithm>
#include <json.hpp>

#include "lcpkit/kernels.hpp"
#include "parallel.hpp"

namespace lcpkit {

namespace {

void check_width(const AttributeSchema& schema, std::size_t width) {
  if (width != schema.size()) {
    throw Error(ErrorCode::kDimension,
                "row width " + std::to_string(width) + " does not match schema '" +
                    schema.name() + "' with " + std::to_string(schema.size()) +
                    " attributes");
  }
}

// Stable per-rule slots for aggregation.
struct RuleIndex {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // sorted
  std::vector<std::string> keys;  // pairs, then dependencies, then groups

  explicit RuleIndex(const AttributeSchema& schema) {
    for (const auto& rule : schema.exclusion_rules()) {
      for (auto b : rule.excluded) {
        pairs.emplace_back(std::min(rule.subject, b), std::max(rule.subject, b));
      }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    const auto& attrs = schema.attributes();
    for (auto [a, b] : pairs) keys.push_back("exclude:" + attrs[a] + "|" + attrs[b]);
    for (const auto& rule : schema.dependency_rules()) {
      std::string key = "require:" + attrs[rule.subject] + "->";
      for (std::size_t i = 0; i < rule.any_of.size(); ++i) {
        if (i) key += "|";
        key += attrs[rule.any_of[i]];
      }
      keys.push_back(std::move(key));
    }
    for (const auto& g : schema.exhaustive_groups()) {
      keys.push_back("exhaustive:" + g.name);
    }
  }

  std::size_t pair_slot(std::pair<std::size_t, std::size_t> p) const {
    return static_cast<std::size_t>(
        std::lower_bound(pairs.begin(), pairs.end(), p) - pairs.begin());
  }
};

struct Tally {
  std::size_t consistent = 0;
  std::size_t incomplete = 0;
  std::size_t impossible = 0;
  std::vector<std::size_t> rule_counts;
};

}  // namespace

std::string_view status_name(Status s) noexcept {
  switch (s) {
    case Status::kConsistent: return "consistent";
    case Status::kIncomplete: return "incomplete";
    case Status::kImpossible: return "impossible";
  }
  return "unknown";
}

double failure_ratio(std::size_t n_incomplete, std::size_t n_impossible,
                     std::size_t n_total) {
  if (n_total == 0) return 0.0;
  return static_cast<double>(n_incomplete + n_impossible) /
         static_cast<double>(n_total);
}

BinaryMatrix binarize(const ScoreMatrix& scores, double threshold) {
  const auto& v = scores.values;
  auto bad = kernels::find_non_finite(v.flat());
  if (bad != v.size()) {
    std::size_t r = bad / v.cols();
    std::size_t c = bad % v.cols();
    std::string id = r < scores.row_ids.size() ? scores.row_ids[r]
                                               : std::to_string(r);
    throw Error(ErrorCode::kInput, "non-finite score at row '" + id +
                                       "' (index " + std::to_string(r) +
                                       "), column " + std::to_string(c));
  }
  BinaryMatrix out{scores.row_ids, BitMatrix(v.rows(), v.cols())};
  kernels::threshold_greater(v.flat(), threshold, out.values.flat());
  return out;
}

ConsistencyVerdict check_vector(const AttributeSchema& schema,
                                std::span<const std::uint8_t> row) {
  check_width(schema, row.size());
  ConsistencyVerdict v;
  for (const auto& rule : schema.exclusion_rules()) {
    if (!row[rule.subject]) continue;
    for (auto b : rule.excluded) {
      if (row[b]) {
        v.violated_exclusions.emplace_back(std::min(rule.subject, b),
                                           std::max(rule.subject, b));
      }
    }
  }
  std::sort(v.violated_exclusions.begin(), v.violated_exclusions.end());
  v.violated_exclusions.erase(
      std::unique(v.violated_exclusions.begin(), v.violated_exclusions.end()),
      v.violated_exclusions.end());

  const auto& deps = schema.dependency_rules();
  for (std::size_t r = 0; r < deps.size(); ++r) {
    if (!row[deps[r].subject]) continue;
    bool met = std::any_of(deps[r].any_of.begin(), deps[r].any_of.end(),
                           [&](std::size_t i) { return row[i] != 0; });
    if (!met) {
      v.violated_dependencies.push_back(deps[r].subject);
      v.violated_dependency_rules.push_back(r);
    }
  }

  for (const auto& g : schema.exhaustive_groups()) {
    bool any = std::any_of(g.members.begin(), g.members.end(),
                           [&](std::size_t i) { return row[i] != 0; });
    if (!any) v.empty_groups.push_back(g.name);
  }

  if (!v.violated_exclusions.empty() || !v.violated_dependencies.empty()) {
    v.status = Status::kImpossible;
  } else if (!v.empty_groups.empty()) {
    v.status = Status::kIncomplete;
  }
  return v;
}

AuditReport audit_binary(const AttributeSchema& schema,
                         const BinaryMatrix& preds, unsigned threads) {
  if (preds.rows() > 0) check_width(schema, preds.cols());
  const RuleIndex index(schema);
  const std::size_t n_pairs = index.pairs.size();
  const std::size_t n_deps = schema.dependency_rules().size();
  const auto& groups = schema.exhaustive_groups();

  std::vector<Tally> tallies(std::max(1u, threads));
  detail::run_sharded(
      preds.rows(), threads,
      [&](std::size_t shard, std::size_t begin, std::size_t end) {
        Tally& t = tallies[shard];
        t.rule_counts.assign(index.keys.size(), 0);
        for (std::size_t r = begin; r < end; ++r) {
          auto v = check_vector(schema, preds.values.row(r));
          switch (v.status) {
            case Status::kConsistent: ++t.consistent; break;
            case Status::kIncomplete: ++t.incomplete; break;
            case Status::kImpossible: ++t.impossible; break;
          }
          for (auto p : v.violated_exclusions) ++t.rule_counts[index.pair_slot(p)];
          for (auto d : v.violated_dependency_rules) ++t.rule_counts[n_pairs + d];
          for (const auto& name : v.empty_groups) {
            auto it = std::find_if(groups.begin(), groups.end(),
                                   [&](const auto& g) { return g.name == name; });
            ++t.rule_counts[n_pairs + n_deps +
                            static_cast<std::size_t>(it - groups.begin())];
          }
        }
      });

  AuditReport report;
  report.n_total = preds.rows();
  std::vector<std::size_t> counts(index.keys.size(), 0);
  for (const auto& t : tallies) {
    report.n_consistent += t.consistent;
    report.n_incomplete += t.incomplete;
    report.n_impossible += t.impossible;
    for (std::size_t i = 0; i < t.rule_counts.size(); ++i) counts[i] += t.rule_counts[i];
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    report.per_rule_counts[index.keys[i]] = counts[i];
  }
  report.failure_ratio =
      failure_ratio(report.n_incomplete, report.n_impossible, report.n_total);
  return report;
}

AuditReport audit_dataset(const AttributeSchema& schema,
                          const ScoreMatrix& scores, double threshold,
                          unsigned threads) {
  if (scores.rows() > 0) check_width(schema, scores.cols());
  return audit_binary(schema, binarize(scores, threshold), threads);
}

std::string audit_report_json(const AuditReport& report, int indent) {
  nlohmann::ordered_json j;
  j["n_total"] = report.n_total;
  j["n_consistent"] = report.n_consistent;
  j["n_incomplete"] = report.n_incomplete;
  j["n_impossible"] = report.n_impossible;
  j["failure_ratio"] = report.failure_ratio;
  j["per_rule_counts"] = report.per_rule_counts;
  return j.dump(indent);
}

}  // namespace lcpkit
