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

#include "lcpkit/metrics.hpp"

#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "lcpkit/audit.hpp"

namespace lcpkit {

namespace {

MetricsReport score(const BinaryMatrix& preds, const BinaryMatrix& labels,
                    const std::vector<std::string>& names,
                    const std::vector<std::uint8_t>& row_valid,
                    MetricsMode mode) {
  if (preds.rows() != labels.rows() || preds.cols() != labels.cols()) {
    throw Error(ErrorCode::kDimension,
                "predictions are " + std::to_string(preds.rows()) + "x" +
                    std::to_string(preds.cols()) + ", labels are " +
                    std::to_string(labels.rows()) + "x" +
                    std::to_string(labels.cols()));
  }
  const std::size_t n = preds.rows();
  const std::size_t k = preds.cols();
  MetricsReport rep;
  rep.mode = mode;
  rep.n_rows = n;
  for (auto v : row_valid) rep.n_invalidated_rows += v ? 0 : 1;

  double sum = 0.0, sum_p = 0.0, sum_n = 0.0;
  std::size_t cnt = 0, cnt_p = 0, cnt_n = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t correct = 0, pos = 0, pos_ok = 0, neg = 0, neg_ok = 0;
    for (std::size_t r = 0; r < n; ++r) {
      bool ok = row_valid[r] && preds.values(r, c) == labels.values(r, c);
      correct += ok;
      if (labels.values(r, c)) {
        ++pos;
        pos_ok += ok;
      } else {
        ++neg;
        neg_ok += ok;
      }
    }
    AttributeAccuracy a;
    a.name = c < names.size() ? names[c] : "attr" + std::to_string(c);
    if (n > 0) {
      a.accuracy = static_cast<double>(correct) / static_cast<double>(n);
      sum += *a.accuracy;
      ++cnt;
    }
    if (pos > 0) {
      a.positive_accuracy = static_cast<double>(pos_ok) / static_cast<double>(pos);
      sum_p += *a.positive_accuracy;
      ++cnt_p;
    }
    if (neg > 0) {
      a.negative_accuracy = static_cast<double>(neg_ok) / static_cast<double>(neg);
      sum_n += *a.negative_accuracy;
      ++cnt_n;
    }
    rep.attributes.push_back(std::move(a));
  }
  rep.acc_avg = cnt ? sum / static_cast<double>(cnt) : 0.0;
  rep.acc_avg_p = cnt_p ? sum_p / static_cast<double>(cnt_p) : 0.0;
  rep.acc_avg_n = cnt_n ? sum_n / static_cast<double>(cnt_n) : 0.0;
  return rep;
}

nlohmann::ordered_json opt(const std::optional<double>& x) {
  return x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json(nullptr);
}

}  // namespace

MetricsReport attribute_accuracy(const BinaryMatrix& preds,
                                 const BinaryMatrix& labels,
                                 const std::vector<std::string>& names) {
  std::vector<std::uint8_t> valid(preds.rows(), 1);
  return score(preds, labels, names, valid, MetricsMode::kPlain);
}

MetricsReport consistency_enforced_accuracy(const AttributeSchema& schema,
                                            const BinaryMatrix& preds,
                                            const BinaryMatrix& labels) {
  if (preds.cols() != schema.size()) {
    throw Error(ErrorCode::kDimension, "prediction width does not match schema '" +
                                           schema.name() + "'");
  }
  std::vector<std::uint8_t> valid(preds.rows(), 1);
  for (std::size_t r = 0; r < preds.rows(); ++r) {
    valid[r] = check_vector(schema, preds.values.row(r)).status ==
               Status::kConsistent;
  }
  return score(preds, labels, schema.attributes(), valid,
               MetricsMode::kConsistencyEnforced);
}

std::string metrics_json(const std::vector<MetricsReport>& reports,
                         int indent) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["mode"] = r.mode == MetricsMode::kPlain ? "plain" : "consistency_enforced";
    j["n_rows"] = r.n_rows;
    j["n_invalidated_rows"] = r.n_invalidated_rows;
    j["acc_avg"] = r.acc_avg;
    j["acc_avg_n"] = r.acc_avg_n;
    j["acc_avg_p"] = r.acc_avg_p;
    auto attrs = nlohmann::ordered_json::array();
    for (const auto& a : r.attributes) {
      nlohmann::ordered_json e;
      e["name"] = a.name;
      e["accuracy"] = opt(a.accuracy);
      e["negative_accuracy"] = opt(a.negative_accuracy);
      e["positive_accuracy"] = opt(a.positive_accuracy);
      attrs.push_back(std::move(e));
    }
    j["attributes"] = std::move(attrs);
    arr.push_back(std::move(j));
  }
  return arr.dump(indent);
}

std::string metrics_table(
    const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::size_t width = 14;
  for (const auto& [label, _] : rows) width = std::max(width, label.size() + 2);
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-*s %10s %10s %10s\n",
                static_cast<int>(width), "model", "ACC_avg", "ACC_avg^n",
                "ACC_avg^p");
  os << buf;
  MetricsMode last = MetricsMode::kPlain;
  bool first = true;
  for (const auto& [label, rep] : rows) {
    if (first || rep.mode != last) {
      os << (rep.mode == MetricsMode::kPlain
                 ? "-- not considering logical consistency\n"
                 : "-- considering logical consistency\n");
      last = rep.mode;
      first = false;
    }
    std::snprintf(buf, sizeof buf, "%-*s %10.2f %10.2f %10.2f\n",
                  static_cast<int>(width), label.c_str(), 100.0 * rep.acc_avg,
                  100.0 * rep.acc_avg_n, 100.0 * rep.acc_avg_p);
    os << buf;
  }
  return os.str();
}

}  // namespace lcpkit
