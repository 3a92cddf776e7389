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

#include "lcpkit/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lcpkit/kernels.hpp"

namespace lcpkit {

namespace {

void check_shapes(std::size_t r0, std::size_t c0, std::size_t r1,
                  std::size_t c1, const char* what) {
  if (r0 != r1 || c0 != c1) {
    throw Error(ErrorCode::kDimension,
                std::string(what) + ": shape " + std::to_string(r0) + "x" +
                    std::to_string(c0) + " vs " + std::to_string(r1) + "x" +
                    std::to_string(c1));
  }
}

void check_width(const AttributeSchema& schema, std::size_t cols) {
  if (cols != schema.size()) {
    throw Error(ErrorCode::kDimension,
                "prediction width " + std::to_string(cols) +
                    " does not match schema '" + schema.name() + "'");
  }
}

template <typename Rule>
const std::vector<std::size_t>& targets(const Rule& rule);
template <>
const std::vector<std::size_t>& targets(const ExclusionRule& rule) {
  return rule.excluded;
}
template <>
const std::vector<std::size_t>& targets(const DependencyRule& rule) {
  return rule.any_of;
}

template <typename Rule>
double hard_rule_mean(const std::vector<Rule>& rules, const BitMatrix& preds,
                      std::vector<RuleFrequency>& out, double if_none) {
  double sum = 0.0;
  std::size_t active = 0;
  for (const auto& rule : rules) {
    RuleFrequency f;
    f.subject = rule.subject;
    std::size_t fired = 0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < preds.rows(); ++r) {
      if (!preds(r, rule.subject)) continue;
      ++fired;
      const auto& ts = targets(rule);
      if (std::any_of(ts.begin(), ts.end(),
                      [&](std::size_t t) { return preds(r, t) != 0; })) {
        ++hits;
      }
    }
    f.fired = static_cast<double>(fired);
    f.hits = static_cast<double>(hits);
    if (fired > 0) {
      f.frequency = f.hits / f.fired;
      sum += *f.frequency;
      ++active;
    }
    out.push_back(f);
  }
  return active == 0 ? if_none : sum / static_cast<double>(active);
}

// Soft conditional frequencies and d(mean)/d(probs), accumulated into grad.
// Each rule enters the mean with weight g = 1 - prod_rows(1 - p(subject)),
// the soft probability that the subject fires anywhere in the batch, so
// rules that never fire drop out as the inputs saturate.
template <typename Rule>
double soft_rule_mean(const std::vector<Rule>& rules,
                      const Matrix<double>& probs,
                      std::vector<RuleFrequency>& out, double if_none,
                      Matrix<double>& grad) {
  const std::size_t n = probs.rows();
  struct Active {
    std::size_t rule;
    double freq;
    double weight_sum;
    double gate;
  };
  std::vector<Active> active;
  double gated = 0.0;
  double gate_sum = 0.0;

  for (std::size_t ri = 0; ri < rules.size(); ++ri) {
    const auto& rule = rules[ri];
    const auto& ts = targets(rule);
    RuleFrequency f;
    f.subject = rule.subject;
    double max_w = 0.0;
    double sw = 0.0;
    double swr = 0.0;
    double silent = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      double none = 1.0;
      for (auto t : ts) none *= 1.0 - probs(r, t);
      double w = probs(r, rule.subject);
      max_w = std::max(max_w, w);
      sw += w;
      swr += w * (1.0 - none);
      silent *= 1.0 - w;
    }
    f.fired = sw;
    f.hits = swr;
    if (max_w >= kSoftSubjectFloor) {
      f.frequency = swr / sw;
      double g = 1.0 - silent;
      gated += g * *f.frequency;
      gate_sum += g;
      active.push_back({ri, *f.frequency, sw, g});
    }
    out.push_back(f);
  }
  if (active.empty() || !(gate_sum > 0.0)) return if_none;
  const double mean = gated / gate_sum;

  std::vector<double> prefix(n + 1), suffix(n + 1);
  for (const auto& a : active) {
    const auto& rule = rules[a.rule];
    const auto& ts = targets(rule);
    const double share = a.gate / gate_sum;
    const double pull = (a.freq - mean) / gate_sum;
    prefix[0] = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      prefix[r + 1] = prefix[r] * (1.0 - probs(r, rule.subject));
    }
    suffix[n] = 1.0;
    for (std::size_t r = n; r-- > 0;) {
      suffix[r] = suffix[r + 1] * (1.0 - probs(r, rule.subject));
    }
    for (std::size_t r = 0; r < n; ++r) {
      double none = 1.0;
      for (auto t : ts) none *= 1.0 - probs(r, t);
      double w = probs(r, rule.subject);
      // d f / d w_r and d g / d w_r
      grad(r, rule.subject) += share * ((1.0 - none) - a.freq) / a.weight_sum +
                               pull * prefix[r] * suffix[r + 1];
      // d f / d p(t) = w_r / S_w * prod_{m != t} (1 - p(m))
      for (auto t : ts) {
        double others = 1.0;
        for (auto m : ts) {
          if (m != t) others *= 1.0 - probs(r, m);
        }
        grad(r, t) += share * w / a.weight_sum * others;
      }
    }
  }
  return mean;
}

// Relaxed statistics of inputs in [0, 1] and their gradients.
SoftLcp relaxed_lcp(const AttributeSchema& schema, const Matrix<double>& in,
                    const LossConfig& config) {
  SoftLcp out;
  out.grad_p_ex = Matrix<double>(in.rows(), in.cols());
  out.grad_p_d = Matrix<double>(in.rows(), in.cols());
  out.stats.p_ex = soft_rule_mean(schema.exclusion_rules(), in,
                                  out.stats.exclusion, 0.0, out.grad_p_ex);
  out.stats.p_d = soft_rule_mean(schema.dependency_rules(), in,
                                 out.stats.dependency, 1.0, out.grad_p_d);
  double inner =
      config.alpha * out.stats.p_ex + config.beta * (1.0 - out.stats.p_d);
  out.value = inner * inner;
  out.gradient = Matrix<double>(in.rows(), in.cols());
  kernels::axpy(2.0 * inner * config.alpha, out.grad_p_ex.flat(),
                out.gradient.flat());
  kernels::axpy(-2.0 * inner * config.beta, out.grad_p_d.flat(),
                out.gradient.flat());
  return out;
}

}  // namespace

void LossConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw Error(ErrorCode::kConfig, "alpha and beta must be non-negative");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::kConfig, "lambda must lie in [0, 1]");
  }
  if (!std::isfinite(threshold)) {
    throw Error(ErrorCode::kConfig, "threshold must be finite");
  }

}

double bce_loss(const Matrix<double>& probs, const BitMatrix& labels) {
  check_shapes(probs.rows(), probs.cols(), labels.rows(), labels.cols(),
               "bce_loss");
  if (probs.size() == 0) return 0.0;
  double sum = 0.0;
  auto p = probs.flat();
  auto y = labels.flat();
  for (std::size_t i = 0; i < p.size(); ++i) {
    double q = std::clamp(p[i], kProbClamp, 1.0 - kProbClamp);
    sum -= y[i] ? std::log(q) : std::log1p(-q);
  }
  return sum / static_cast<double>(p.size());
}

Matrix<double> bce_gradient(const Matrix<double>& probs,
                            const BitMatrix& labels) {
  check_shapes(probs.rows(), probs.cols(), labels.rows(), labels.cols(),
               "bce_gradient");
  Matrix<double> grad(probs.rows(), probs.cols());
  if (probs.size() == 0) return grad;
  const double inv = 1.0 / static_cast<double>(probs.size());
  auto p = probs.flat();
  auto y = labels.flat();
  auto g = grad.flat();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < kProbClamp || p[i] > 1.0 - kProbClamp) continue;
    g[i] = y[i] ? -inv / p[i] : inv / (1.0 - p[i]);
  }
  return grad;
}

ConsistencyStats hard_consistency_stats(const AttributeSchema& schema,
                                        const BitMatrix& preds) {
  check_width(schema, preds.cols());
  ConsistencyStats s;
  s.p_ex = hard_rule_mean(schema.exclusion_rules(), preds, s.exclusion, 0.0);
  s.p_d = hard_rule_mean(schema.dependency_rules(), preds, s.dependency, 1.0);
  return s;
}

double lcp_loss(double p_ex, double p_d, const LossConfig& config) {
  double inner = config.alpha * p_ex + config.beta * (1.0 - p_d);
  return inner * inner;
}

double lcp_loss(const ConsistencyStats& stats, const LossConfig& config) {
  return lcp_loss(stats.p_ex, stats.p_d, config);
}

double total_loss(double bce, double lcp, const LossConfig& config) {
  return (1.0 - config.lambda) * bce + config.lambda * lcp;
}

SoftLcp soft_lcp_surrogate(const AttributeSchema& schema,
                           const Matrix<double>& probs,
                           const LossConfig& config) {
  check_width(schema, probs.cols());
  return relaxed_lcp(schema, probs, config);
}

SoftLcp straight_through_lcp(const AttributeSchema& schema,
                             const Matrix<double>& probs,
                             const BitMatrix& indicators,
                             const LossConfig& config) {
  check_width(schema, probs.cols());
  check_shapes(probs.rows(), probs.cols(), indicators.rows(), indicators.cols(),
               "straight_through_lcp");
  Matrix<double> hard(indicators.rows(), indicators.cols());
  for (std::size_t i = 0; i < hard.size(); ++i) hard.flat()[i] = indicators.flat()[i];
  return relaxed_lcp(schema, hard, config);
}

}  // namespace lcpkit
