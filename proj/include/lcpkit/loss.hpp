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
#include <optional>
#include <vector>

#include "lcpkit/matrix.hpp"
#include "lcpkit/schema.hpp"

namespace lcpkit {

struct LossConfig {
  double alpha = 1.0;      // weight on P_ex
  double beta = 24.0;      // weight on 1 - P_d
  double lambda = 0.5;     // BCE / LCP mixing
  double threshold = 0.5;  // binarization for the hard statistics

  // Throws Error(kConfig) unless alpha, beta >= 0 and lambda in [0, 1].
  void validate() const;
};

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-7;

// Rules whose subject never fires (hard) or whose subject probability stays
// below this everywhere (soft) are left out of the mean.
inline constexpr double kSoftSubjectFloor = 1e-12;

// Mean binary cross-entropy over all N*K entries, summed row-major.
double bce_loss(const Matrix<double>& probs, const BitMatrix& labels);

// d bce_loss / d probs. Zero where the clamp is active.
Matrix<double> bce_gradient(const Matrix<double>& probs,
                            const BitMatrix& labels);

// Conditional frequency P(sum of targets > 0 | subject = 1) for one rule.
struct RuleFrequency {
  std::size_t subject = 0;
  double fired = 0.0;  // denominator: (soft) count of rows with subject on
  double hits = 0.0;   // numerator
  std::optional<double> frequency;  // empty when the rule was skipped
};

struct ConsistencyStats {
  double p_ex = 0.0;  // 0 when no exclusion rule fired
  double p_d = 1.0;   // 1 when no dependency rule fired
  std::vector<RuleFrequency> exclusion;   // parallel to exclusion_rules()
  std::vector<RuleFrequency> dependency;  // parallel to dependency_rules()
};

ConsistencyStats hard_consistency_stats(const AttributeSchema& schema,
                                        const BitMatrix& preds);

// (alpha * p_ex + beta * (1 - p_d))^2
double lcp_loss(double p_ex, double p_d, const LossConfig& config);
double lcp_loss(const ConsistencyStats& stats, const LossConfig& config);

// (1 - lambda) * bce + lambda * lcp
double total_loss(double bce, double lcp, const LossConfig& config);

// Differentiable relaxation of the hard statistics: the subject indicator
// becomes p(subject) and "any target on" becomes 1 - prod(1 - p(target)).
// Rules are averaged with weight 1 - prod_rows(1 - p(subject)), the soft
// counterpart of skipping rules that never fire.
struct SoftLcp {
  double value = 0.0;
  ConsistencyStats stats;
  Matrix<double> grad_p_ex;  // d p_ex / d probs
  Matrix<double> grad_p_d;   // d p_d / d probs
  Matrix<double> gradient;   // d value / d probs
};

SoftLcp soft_lcp_surrogate(const AttributeSchema& schema,
                           const Matrix<double>& probs,
                           const LossConfig& config);

// Straight-through estimator. The value and statistics are the hard ones of
// `indicators` (thresholded, possibly compensated, predictions); the
// gradient is the relaxation's derivative evaluated at those indicators and
// passed to the probabilities unchanged.
SoftLcp straight_through_lcp(const AttributeSchema& schema,
                             const Matrix<double>& probs,
                             const BitMatrix& indicators,
                             const LossConfig& config);

}  // namespace lcpkit
