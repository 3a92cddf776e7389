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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "lcpkit/audit.hpp"
#include "lcpkit/error.hpp"
#include "oracles.hpp"

using namespace lcpkit;

namespace {

std::size_t idx(const AttributeSchema& s, std::string_view name) {
  return *s.index_of(name);
}

// Scores that land on a mix of consistent, incomplete and impossible rows.
ScoreMatrix mixed_scores(std::mt19937_64& rng, const AttributeSchema& s,
                         std::size_t n) {
  ScoreMatrix m{sequential_ids(n), Matrix<double>(n, s.size(), -1.0)};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (std::size_t r = 0; r < n; ++r) {
    for (const auto& g : s.exhaustive_groups()) {
      std::uniform_int_distribution<std::size_t> pick(0, g.members.size() - 1);
      m.values(r, g.members[pick(rng)]) = 0.8 + noise(rng);
    }
    for (std::size_t c = 0; c < s.size(); ++c) {
      if (u(rng) < 0.05) m.values(r, c) = u(rng);
    }
  }
  return m;
}

AuditReport oracle_report(const SchemaDraft& d, const BitMatrix& bits) {
  AuditReport r;
  r.n_total = bits.rows();
  for (std::size_t n = 0; n < bits.rows(); ++n) {
    auto row = bits.row(n);
    auto v = oracle::check(d, std::vector<std::uint8_t>(row.begin(), row.end()));
    if (v.status == Status::kConsistent) ++r.n_consistent;
    if (v.status == Status::kIncomplete) ++r.n_incomplete;
    if (v.status == Status::kImpossible) ++r.n_impossible;
  }
  return r;
}

}  // namespace

TEST_CASE("binarize: worked example and strict ties") {
  ScoreMatrix s{{"img"}, Matrix<double>(1, 4, {0.3, -2, 0.1, -1.5})};
  auto b = binarize(s, 0.5);
  CHECK(b.row_ids == s.row_ids);
  CHECK(b.values == BitMatrix(1, 4, 0));

  ScoreMatrix ties{sequential_ids(3), Matrix<double>(3, 5, 0.5)};
  CHECK(binarize(ties, 0.5).values == BitMatrix(3, 5, 0));
}

TEST_CASE("binarize matches an element-wise comparison") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  ScoreMatrix s{sequential_ids(10), Matrix<double>(10, 22)};
  for (auto& x : s.values.flat()) x = u(rng);
  s.values(4, 7) = 0.5;
  auto b = binarize(s, 0.5);
  for (std::size_t r = 0; r < 10; ++r) {
    for (std::size_t c = 0; c < 22; ++c) {
      CHECK(b.values(r, c) == (s.values(r, c) > 0.5 ? 1 : 0));
    }
  }
}

TEST_CASE("binarize rejects non-finite scores with their position") {
  ScoreMatrix s{{"a", "b"}, Matrix<double>(2, 3, 0.0)};
  s.values(1, 2) = std::numeric_limits<double>::quiet_NaN();
  try {
    binarize(s, 0.5);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInput);
    std::string msg = e.what();
    CHECK(msg.find("'b'") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
  }
}

TEST_CASE("check_vector on the built-in schema") {
  const auto& s = fh37k_default();
  std::vector<std::uint8_t> zero(s.size(), 0);
  auto v = check_vector(s, zero);
  CHECK(v.status == Status::kIncomplete);
  CHECK(v.empty_groups ==
        std::vector<std::string>{"beard_area", "beard_length", "mustache",
                                 "sideburns", "bald"});
  CHECK(v.violated_exclusions.empty());
  CHECK(v.violated_dependencies.empty());

  std::vector<std::uint8_t> row(s.size(), 0);
  for (auto name : {"clean_shaven", "chin_area", "mustache_none", "sideburns_none",
                    "bald_false"}) {
    row[idx(s, name)] = 1;
  }
  v = check_vector(s, row);
  CHECK(v.status == Status::kImpossible);
  std::pair<std::size_t, std::size_t> pair{idx(s, "clean_shaven"), idx(s, "chin_area")};
  CHECK(std::count(v.violated_exclusions.begin(), v.violated_exclusions.end(), pair) == 1);
  CHECK(v.empty_groups.empty());

  std::vector<std::uint8_t> ok(s.size(), 0);
  for (auto name : {"clean_shaven", "mustache_none", "sideburns_none", "bald_false"}) {
    ok[idx(s, name)] = 1;
  }
  CHECK(check_vector(s, ok).status == Status::kConsistent);

  CHECK_THROWS_AS(check_vector(s, std::vector<std::uint8_t>(3)), Error);
}

TEST_CASE("dependency violations are listed by subject") {
  const auto& s = fh37k_default();
  std::vector<std::uint8_t> row(s.size(), 0);
  for (auto name : {"beard_area_info_not_vis", "long", "mustache_connected_to_beard",
                    "sideburns_none", "bald_false"}) {
    row[idx(s, name)] = 1;
  }
  auto v = check_vector(s, row);
  CHECK(v.status == Status::kImpossible);
  CHECK(v.violated_exclusions.empty());
  CHECK(v.violated_dependencies.size() == 2);
  CHECK(std::count(v.violated_dependencies.begin(), v.violated_dependencies.end(),
                   idx(s, "long")) == 1);
}

TEST_CASE("property: check_vector agrees with the first-principles oracle") {
  std::mt19937_64 rng(2024);
  int statuses[3] = {0, 0, 0};
  for (int trial = 0; trial < 1000; ++trial) {
    auto draft = oracle::random_draft(rng, 8);
    auto schema = AttributeSchema::build(draft);
    auto row = oracle::random_bits(rng, 8, trial % 2 ? 0.2 : 0.4);
    auto expected = oracle::check(draft, row);
    auto got = check_vector(schema, row);
    CHECK(oracle::same(expected, got));
    ++statuses[static_cast<int>(got.status)];
  }
  // The sample must exercise every outcome.
  CHECK(statuses[0] > 0);
  CHECK(statuses[1] > 0);
  CHECK(statuses[2] > 0);
}

TEST_CASE("failure ratio arithmetic on published accounting") {
  CHECK(failure_ratio(331870, 1038, 603910) == doctest::Approx(0.5513).epsilon(0.0001));
  CHECK(std::round(failure_ratio(331870, 1038, 603910) * 10000) == 5513);
  CHECK(std::round(failure_ratio(0, 5595, 603910) * 10000) == 93);
  CHECK(std::round(failure_ratio(0, 10215, 603910) * 10000) == 169);
  CHECK(failure_ratio(0, 0, 0) == 0.0);
}

TEST_CASE("audit of fully consistent rows") {
  const auto& s = fh37k_default();
  ScoreMatrix m{sequential_ids(4), Matrix<double>(4, s.size(), 0.0)};
  for (std::size_t r = 0; r < 4; ++r) {
    for (auto name : {"side_to_side", "short", "mustache_none", "sideburns_present",
                      "bald_top_only"}) {
      m.values(r, idx(s, name)) = 0.9;
    }
  }
  auto rep = audit_dataset(s, m, 0.5);
  CHECK(rep.n_total == 4);
  CHECK(rep.n_consistent == 4);
  CHECK(rep.n_incomplete == 0);
  CHECK(rep.n_impossible == 0);
  CHECK(rep.failure_ratio == 0.0);
  for (const auto& [key, count] : rep.per_rule_counts) CHECK(count == 0);
}

TEST_CASE("5,000 synthetic rows: report equals the row-by-row oracle") {
  const auto& s = fh37k_default();
  std::mt19937_64 rng(99);
  auto scores = mixed_scores(rng, s, 5000);
  auto rep = audit_dataset(s, scores, 0.5);

  // Oracle thresholds independently.
  BitMatrix bits(5000, s.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bits.flat()[i] = scores.values.flat()[i] > 0.5 ? 1 : 0;
  }
  auto expected = oracle_report(s.draft(), bits);
  CHECK(rep.n_total == 5000);
  CHECK(rep.n_consistent == expected.n_consistent);
  CHECK(rep.n_incomplete == expected.n_incomplete);
  CHECK(rep.n_impossible == expected.n_impossible);
  CHECK(rep.n_consistent + rep.n_incomplete + rep.n_impossible == rep.n_total);
  CHECK(rep.failure_ratio ==
        static_cast<double>(expected.n_incomplete + expected.n_impossible) / 5000.0);
  CHECK(expected.n_consistent > 0);
  CHECK(expected.n_incomplete > 0);
  CHECK(expected.n_impossible > 0);

  std::size_t exhaustive_sum = 0;
  for (const auto& [key, count] : rep.per_rule_counts) {
    if (key.rfind("exhaustive:", 0) == 0) exhaustive_sum += count;
  }
  std::size_t empty = 0;
  for (std::size_t r = 0; r < bits.rows(); ++r) {
    auto row = bits.row(r);
    empty += oracle::check(s.draft(), {row.begin(), row.end()}).empty_groups.size();
  }
  CHECK(exhaustive_sum == empty);
}

TEST_CASE("audit is invariant to row order and thread count") {
  const auto& s = fh37k_default();
  std::mt19937_64 rng(5);
  auto scores = mixed_scores(rng, s, 777);
  auto base = audit_dataset(s, scores, 0.5, 1);

  std::vector<std::size_t> perm(scores.rows());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  ScoreMatrix shuffled{{}, Matrix<double>(scores.rows(), scores.cols())};
  for (std::size_t r = 0; r < perm.size(); ++r) {
    shuffled.row_ids.push_back(scores.row_ids[perm[r]]);
    auto src = scores.values.row(perm[r]);
    std::copy(src.begin(), src.end(), shuffled.values.row(r).begin());
  }
  CHECK(audit_dataset(s, shuffled, 0.5) == base);
  for (unsigned t : {2u, 3u, 8u, 1000u}) CHECK(audit_dataset(s, scores, 0.5, t) == base);
  CHECK(audit_report_json(audit_dataset(s, shuffled, 0.5, 4)) == audit_report_json(base));
}

TEST_CASE("raising the threshold never shrinks the set of empty groups") {
  const auto& s = fh37k_default();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> scores(s.size());
    for (auto& x : scores) x = u(rng);
    std::vector<std::string> previous;
    for (double t = 0.0; t <= 1.0; t += 0.05) {
      std::vector<std::uint8_t> row(s.size());
      for (std::size_t c = 0; c < s.size(); ++c) row[c] = scores[c] > t;
      auto groups = check_vector(s, row).empty_groups;
      CHECK(std::includes(groups.begin(), groups.end(), previous.begin(), previous.end(),
                          [&](const std::string& a, const std::string& b) {
                            auto pos = [&](const std::string& n) {
                              for (std::size_t i = 0; i < s.exhaustive_groups().size(); ++i) {
                                if (s.exhaustive_groups()[i].name == n) return i;
                              }
                              return s.exhaustive_groups().size();
                            };
                            return pos(a) < pos(b);
                          }));
      previous = groups;
    }
  }
}

TEST_CASE("report JSON carries counts and per-rule keys") {
  const auto& s = fh37k_default();
  ScoreMatrix m{{"x"}, Matrix<double>(1, s.size(), 0.0)};
  auto json = audit_report_json(audit_dataset(s, m, 0.5));
  CHECK(json.find("\"n_incomplete\": 1") != std::string::npos);
  CHECK(json.find("exhaustive:bald") != std::string::npos);
  CHECK(json.find("exclude:clean_shaven|chin_area") != std::string::npos);
  CHECK(json.find("require:long->chin_area|side_to_side") != std::string::npos);
}

TEST_CASE("width mismatch is a dimension error") {
  ScoreMatrix m{{"x"}, Matrix<double>(1, 3, 0.0)};
  try {
    audit_dataset(fh37k_default(), m, 0.5);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimension);
  }
}
