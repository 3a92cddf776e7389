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

#include <cmath>
#include <random>

#include "lcpkit/audit.hpp"
#include "lcpkit/error.hpp"
#include "lcpkit/metrics.hpp"
#include "oracles.hpp"

using namespace lcpkit;

namespace {

BinaryMatrix random_binary(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                           double p) {
  BinaryMatrix m{sequential_ids(rows), BitMatrix(rows, cols)};
  std::bernoulli_distribution b(p);
  for (auto& v : m.values.flat()) v = b(rng);
  return m;
}

BinaryMatrix complement(BinaryMatrix m) {
  for (auto& v : m.values.flat()) v = 1 - v;
  return m;
}

// Counts correct cells per attribute; `valid` masks rows treated as wrong.
struct Counts {
  std::vector<double> acc, pos, neg;
  double avg = 0, avg_p = 0, avg_n = 0;
};

Counts count_oracle(const BinaryMatrix& p, const BinaryMatrix& y,
                    const std::vector<bool>& valid) {
  Counts c;
  double n_acc = 0, n_pos = 0, n_neg = 0;
  for (std::size_t k = 0; k < p.cols(); ++k) {
    double tp = 0, tn = 0, np = 0, nn = 0;
    for (std::size_t r = 0; r < p.rows(); ++r) {
      bool right = valid[r] && p.values(r, k) == y.values(r, k);
      if (y.values(r, k)) {
        ++np;
        tp += right;
      } else {
        ++nn;
        tn += right;
      }
    }
    c.acc.push_back((tp + tn) / (np + nn));
    c.avg += c.acc.back();
    ++n_acc;
    c.pos.push_back(np ? tp / np : NAN);
    c.neg.push_back(nn ? tn / nn : NAN);
    if (np) {
      c.avg_p += tp / np;
      ++n_pos;
    }
    if (nn) {
      c.avg_n += tn / nn;
      ++n_neg;
    }
  }
  c.avg /= n_acc;
  c.avg_p = n_pos ? c.avg_p / n_pos : 0;
  c.avg_n = n_neg ? c.avg_n / n_neg : 0;
  return c;
}

void check_against(const MetricsReport& rep, const Counts& c) {
  REQUIRE(rep.attributes.size() == c.acc.size());
  for (std::size_t k = 0; k < c.acc.size(); ++k) {
    CHECK(std::abs(*rep.attributes[k].accuracy - c.acc[k]) <= 1e-12);
    if (std::isnan(c.pos[k])) {
      CHECK_FALSE(rep.attributes[k].positive_accuracy.has_value());
    } else {
      CHECK(std::abs(*rep.attributes[k].positive_accuracy - c.pos[k]) <= 1e-12);
    }
    if (std::isnan(c.neg[k])) {
      CHECK_FALSE(rep.attributes[k].negative_accuracy.has_value());
    } else {
      CHECK(std::abs(*rep.attributes[k].negative_accuracy - c.neg[k]) <= 1e-12);
    }
  }
  CHECK(std::abs(rep.acc_avg - c.avg) <= 1e-12);
  CHECK(std::abs(rep.acc_avg_p - c.avg_p) <= 1e-12);
  CHECK(std::abs(rep.acc_avg_n - c.avg_n) <= 1e-12);
}

}  // namespace

TEST_CASE("identical and complementary predictions") {
  std::mt19937_64 rng(1);
  auto y = random_binary(rng, 30, 6, 0.4);
  auto same = attribute_accuracy(y, y);
  CHECK(same.acc_avg == 1.0);
  CHECK(same.acc_avg_p == 1.0);
  CHECK(same.acc_avg_n == 1.0);
  auto opposite = attribute_accuracy(complement(y), y);
  CHECK(opposite.acc_avg == 0.0);
  CHECK(opposite.acc_avg_p == 0.0);
  CHECK(opposite.acc_avg_n == 0.0);
  for (const auto& a : opposite.attributes) CHECK(*a.accuracy == 0.0);
}

TEST_CASE("plain accuracy matches confusion counts") {
  std::mt19937_64 rng(50);
  for (int trial = 0; trial < 30; ++trial) {
    auto y = random_binary(rng, 50, 5, 0.3);
    auto p = random_binary(rng, 50, 5, 0.4);
    // One column with no positive labels.
    for (std::size_t r = 0; r < 50; ++r) y.values(r, 4) = 0;
    auto rep = attribute_accuracy(p, y, {"a", "b", "c", "d", "e"});
    check_against(rep, count_oracle(p, y, std::vector<bool>(50, true)));
    CHECK(rep.attributes[2].name == "c");
    double mean = 0;
    for (const auto& a : rep.attributes) mean += *a.accuracy;
    CHECK(std::abs(rep.acc_avg - mean / 5) <= 1e-12);
  }
  CHECK(attribute_accuracy(random_binary(rng, 3, 2, 0.5), random_binary(rng, 3, 2, 0.5))
            .attributes[1]
            .name == "attr1");
}

TEST_CASE("consistency-enforced accuracy invalidates flagged rows") {
  const auto& s = fh37k_default();
  std::mt19937_64 rng(9);
  std::size_t mixed_seen = 0;
  for (int trial = 0; trial < 20; ++trial) {
    BinaryMatrix y{sequential_ids(60), BitMatrix(60, s.size())};
    BinaryMatrix p = y;
    std::bernoulli_distribution flip(0.04);
    for (std::size_t r = 0; r < 60; ++r) {
      for (const auto& g : s.exhaustive_groups()) {
        std::uniform_int_distribution<std::size_t> pick(0, g.members.size() - 1);
        y.values(r, g.members[pick(rng)]) = 1;
      }
    }
    p = y;
    for (auto& v : p.values.flat()) {
      if (flip(rng)) v = 1 - v;
    }
    std::vector<bool> valid(60);
    std::size_t bad = 0;
    auto draft = s.draft();
    for (std::size_t r = 0; r < 60; ++r) {
      auto row = p.values.row(r);
      valid[r] = oracle::check(draft, {row.begin(), row.end()}).status ==
                 Status::kConsistent;
      bad += !valid[r];
    }
    mixed_seen += bad > 0 && bad < 60;
    auto enforced = consistency_enforced_accuracy(s, p, y);
    auto plain = attribute_accuracy(p, y, s.attributes());
    check_against(enforced, count_oracle(p, y, valid));
    CHECK(enforced.n_invalidated_rows == bad);
    CHECK(enforced.mode == MetricsMode::kConsistencyEnforced);
    CHECK(enforced.acc_avg <= plain.acc_avg);
    for (std::size_t k = 0; k < s.size(); ++k) {
      CHECK(*enforced.attributes[k].accuracy <= *plain.attributes[k].accuracy);
    }
  }
  CHECK(mixed_seen > 0);
}

TEST_CASE("consistency-enforced extremes") {
  const auto& s = fh37k_default();
  BinaryMatrix y{sequential_ids(3), BitMatrix(3, s.size())};
  for (std::size_t r = 0; r < 3; ++r) {
    for (auto name : {"clean_shaven", "mustache_none", "sideburns_none", "bald_false"}) {
      y.values(r, *s.index_of(name)) = 1;
    }
  }
  auto enforced = consistency_enforced_accuracy(s, y, y);
  auto plain = attribute_accuracy(y, y, s.attributes());
  CHECK(enforced.acc_avg == plain.acc_avg);
  CHECK(enforced.acc_avg_p == plain.acc_avg_p);
  CHECK(enforced.acc_avg_n == plain.acc_avg_n);

  BinaryMatrix all_zero{sequential_ids(3), BitMatrix(3, s.size(), 0)};
  auto none = consistency_enforced_accuracy(s, all_zero, y);
  CHECK(none.acc_avg == 0.0);
  CHECK(none.acc_avg_p == 0.0);
  CHECK(none.acc_avg_n == 0.0);
  CHECK(none.n_invalidated_rows == 3);
}

TEST_CASE("shape mismatch is rejected") {
  BinaryMatrix a{sequential_ids(2), BitMatrix(2, 3)};
  BinaryMatrix b{sequential_ids(3), BitMatrix(3, 3)};
  CHECK_THROWS_AS(attribute_accuracy(a, b), Error);
  CHECK_THROWS_AS(consistency_enforced_accuracy(fh37k_default(), a, a), Error);
}

TEST_CASE("JSON and table output") {
  std::mt19937_64 rng(2);
  auto y = random_binary(rng, 10, 3, 0.5);
  auto rep = attribute_accuracy(y, y, {"x", "y", "z"});
  auto json = metrics_json({rep});
  CHECK(json.find("\"acc_avg\": 1.0") != std::string::npos);
  CHECK(json.find("\"plain\"") != std::string::npos);
  auto table = metrics_table({{"BCE", rep}});
  CHECK(table.find("BCE") != std::string::npos);
  CHECK(table.find("100.00") != std::string::npos);
}
