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
#include <string>
#include <string_view>
#include <vector>

#include "lcpkit/loss.hpp"
#include "lcpkit/matrix.hpp"
#include "lcpkit/schema.hpp"

namespace lcpkit {

// ---------------------------------------------------------------------------
// Synthetic data

struct SyntheticDatasetSpec {
  std::size_t n_train = 5000;
  std::size_t n_val = 1000;
  std::size_t n_test = 1000;
  // Width of the label embedding; 0 means "schema size". The first K columns
  // are noisy copies of the labels, the rest random mixtures of them.
  std::size_t feature_dim = 0;
  double noise_sigma = 0.8;
  std::size_t distractor_dims = 8;  // pure N(0, 1) columns appended
  std::uint64_t seed = 20260101;
  std::size_t max_draws_per_row = 10000;

  void validate(const AttributeSchema& schema) const;
};

struct DataSplit {
  std::vector<std::string> ids;
  Matrix<double> features;
  BitMatrix labels;

  std::size_t rows() const noexcept { return features.rows(); }
};

struct SyntheticDataset {
  DataSplit train;
  DataSplit val;
  DataSplit test;
  std::size_t rejected_draws = 0;  // label vectors discarded as inconsistent
};

// Label rows pick one member per exhaustive group and are redrawn until the
// whole row is consistent. Throws Error(kSampling) when a row exceeds
// max_draws_per_row.
SyntheticDataset generate_synthetic(const AttributeSchema& schema,
                                    const SyntheticDatasetSpec& spec);

// ---------------------------------------------------------------------------
// Model

struct DenseLayer {
  Matrix<double> weights;  // out x in
  std::vector<double> bias;

  std::size_t in() const noexcept { return weights.cols(); }
  std::size_t out() const noexcept { return weights.rows(); }
  bool operator==(const DenseLayer&) const = default;
};

// Feed-forward network: tanh hidden layers, logistic outputs.
struct ClassifierModel {
  std::vector<DenseLayer> layers;

  // Xavier-uniform weights, zero biases.
  static ClassifierModel init(const std::vector<std::size_t>& widths,
                              std::uint64_t seed);

  std::size_t input_width() const;
  std::size_t output_width() const;
  std::size_t parameter_count() const;
  bool operator==(const ClassifierModel&) const = default;
};

// Logistic outputs for every row of `features`.
Matrix<double> predict_probabilities(const ClassifierModel& model,
                                     const Matrix<double>& features);

struct Evaluation {
  ScoreMatrix scores;
  BinaryMatrix predictions;
};

Evaluation evaluate(const ClassifierModel& model, const Matrix<double>& features,
                    const std::vector<std::string>& row_ids, double threshold);

// Checkpoint: "LCPM", u32 layer count, per layer u32 in + u32 out, then per
// layer out*in weights (row-major) and out biases as little-endian f64.
std::string encode_model(const ClassifierModel& model);
ClassifierModel decode_model(std::string_view bytes);
void save_model(const std::string& path, const ClassifierModel& model);
ClassifierModel load_model(const std::string& path);

// ---------------------------------------------------------------------------
// Training

enum class LossMode { kBce, kBceLcp };
// How the LCP term reaches the weights. kSoft differentiates the product
// relaxation. kStraightThrough uses the hard value of the thresholded,
// optionally compensated, predictions with straight_through_lcp().
enum class LcpGradient { kSoft, kStraightThrough };

struct TrainConfig {
  LossMode mode = LossMode::kBce;
  bool compensation_in_training = false;
  LcpGradient lcp_gradient = LcpGradient::kSoft;
  LossConfig loss;
  std::size_t epochs = 60;
  std::size_t batch_size = 256;
  double learning_rate = 0.001;
  double momentum = 0.9;
  double grad_clip = 0.0;  // global gradient-norm cap; 0 disables
  std::uint64_t seed = 1;
  std::vector<std::size_t> hidden = {64, 64};

  void validate() const;
};

// Flat `key = value` text, '#' comments. Keys: mode (bce | bce_lcp),
// compensation_in_training (true | false), lcp_gradient (soft |
// straight_through), alpha, beta, lambda, threshold, epochs, batch_size,
// learning_rate, momentum, grad_clip, seed, hidden (comma-separated
// widths).
std::map<std::string, std::string> parse_key_values(std::string_view text);

// Consumes the keys it knows from `kv`; leaves the rest.
TrainConfig train_config_from(std::map<std::string, std::string>& kv);
std::string format_train_config(const TrainConfig& config);

struct ModelGradient {
  std::vector<Matrix<double>> weights;
  std::vector<std::vector<double>> bias;
};

struct BatchObjective {
  double total = 0.0;
  double bce = 0.0;
  double lcp = 0.0;             // the LCP value that enters `total`
  ConsistencyStats hard_stats;  // on thresholded (maybe compensated) output
};

// Loss of one batch under `config`, plus the gradient when `grad` is set.
BatchObjective batch_objective(const ClassifierModel& model,
                               const AttributeSchema& schema,
                               const TrainConfig& config,
                               const Matrix<double>& features,
                               const BitMatrix& labels, ModelGradient* grad);

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double bce = 0.0;
  double lcp = 0.0;
  double p_ex = 0.0;
  double p_d = 1.0;
  double val_acc_avg = -1.0;        // -1 without validation data
  double val_failure_ratio = -1.0;
};

std::string epoch_log_json(const EpochLog& e);

struct TrainResult {
  ClassifierModel model;
  std::vector<EpochLog> log;
};

// Mini-batch gradient descent with momentum. Single-threaded and
// deterministic. Throws Error(kDivergence) on a non-finite loss.
TrainResult train(const TrainConfig& config, const AttributeSchema& schema,
                  const DataSplit& train_data, const DataSplit* val = nullptr);

}  // namespace lcpkit
