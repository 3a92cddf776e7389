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

#include "lcpkit/trainer.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <random>
#include <sstream>

#include "lcpkit/audit.hpp"
#include "lcpkit/compensate.hpp"
#include "lcpkit/io.hpp"
#include "lcpkit/kernels.hpp"
#include "lcpkit/metrics.hpp"

namespace lcpkit {

// ---------------------------------------------------------------------------
// Synthetic data

void SyntheticDatasetSpec::validate(const AttributeSchema& schema) const {
  if (n_train == 0 || n_val == 0 || n_test == 0) {
    throw Error(ErrorCode::kConfig, "split sizes must be positive");
  }
  if (feature_dim != 0 && feature_dim < schema.size()) {
    throw Error(ErrorCode::kConfig,
                "feature_dim must be at least the attribute count (" +
                    std::to_string(schema.size()) + ")");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw Error(ErrorCode::kConfig, "noise_sigma must be a finite value >= 0");
  }
  if (max_draws_per_row == 0) {
    throw Error(ErrorCode::kConfig, "max_draws_per_row must be positive");
  }
}

namespace {

class LabelSampler {
 public:
  LabelSampler(const AttributeSchema& schema, std::size_t budget)
      : schema_(schema), budget_(budget) {}

  std::vector<std::uint8_t> draw(std::mt19937_64& rng, std::size_t& rejected) {
    std::vector<std::uint8_t> row(schema_.size());
    for (std::size_t attempt = 0; attempt < budget_; ++attempt) {
      std::fill(row.begin(), row.end(), 0);
      for (const auto& g : schema_.exhaustive_groups()) {
        bool filled = std::any_of(g.members.begin(), g.members.end(),
                                  [&](std::size_t m) { return row[m] != 0; });
        if (filled) continue;
        std::uniform_int_distribution<std::size_t> pick(0, g.members.size() - 1);
        row[g.members[pick(rng)]] = 1;
      }
      if (check_vector(schema_, row).status == Status::kConsistent) return row;
      ++rejected;
    }
    throw Error(ErrorCode::kSampling,
                "no consistent label vector after " + std::to_string(budget_) +
                    " draws; schema '" + schema_.name() +
                    "' may be unsatisfiable");
  }

 private:
  const AttributeSchema& schema_;
  std::size_t budget_;
};

}  // namespace

SyntheticDataset generate_synthetic(const AttributeSchema& schema,
                                    const SyntheticDatasetSpec& spec) {
  spec.validate(schema);
  const std::size_t k = schema.size();
  const std::size_t embed = spec.feature_dim == 0 ? k : spec.feature_dim;
  const std::size_t width = embed + spec.distractor_dims;

  std::mt19937_64 label_rng(spec.seed);
  std::mt19937_64 feature_rng(spec.seed ^ 0x9E3779B97F4A7C15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Mixing rows for the embedding columns beyond the K label copies.
  Matrix<double> mixing(embed - k, k);
  const double mix_scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(k, 1)));
  for (auto& m : mixing.flat()) m = gauss(feature_rng) * mix_scale;

  LabelSampler sampler(schema, spec.max_draws_per_row);
  SyntheticDataset ds;
  std::size_t next_id = 0;
  auto make_split = [&](std::size_t n) {
    DataSplit split;
    split.features = Matrix<double>(n, width);
    split.labels = BitMatrix(n, k);
    for (std::size_t r = 0; r < n; ++r) {
      split.ids.push_back("s" + std::to_string(next_id++));
      auto y = sampler.draw(label_rng, ds.rejected_draws);
      std::copy(y.begin(), y.end(), split.labels.row(r).begin());
      auto x = split.features.row(r);
      for (std::size_t c = 0; c < k; ++c) {
        x[c] = static_cast<double>(y[c]) + spec.noise_sigma * gauss(feature_rng);
      }
      for (std::size_t j = 0; j < embed - k; ++j) {
        double v = 0.0;
        for (std::size_t c = 0; c < k; ++c) v += mixing(j, c) * y[c];
        x[k + j] = v + spec.noise_sigma * gauss(feature_rng);
      }
      for (std::size_t j = embed; j < width; ++j) x[j] = gauss(feature_rng);
    }
    return split;
  };
  ds.train = make_split(spec.n_train);
  ds.val = make_split(spec.n_val);
  ds.test = make_split(spec.n_test);
  return ds;
}

// ---------------------------------------------------------------------------
// Model

ClassifierModel ClassifierModel::init(const std::vector<std::size_t>& widths,
                                      std::uint64_t seed) {
  if (widths.size() < 2) {
    throw Error(ErrorCode::kConfig, "a model needs at least input and output widths");
  }
  std::mt19937_64 rng(seed);
  ClassifierModel m;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t in = widths[l];
    const std::size_t out = widths[l + 1];
    if (in == 0 || out == 0) throw Error(ErrorCode::kConfig, "zero layer width");
    double a = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> u(-a, a);
    DenseLayer layer{Matrix<double>(out, in), std::vector<double>(out, 0.0)};
    for (auto& w : layer.weights.flat()) w = u(rng);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

std::size_t ClassifierModel::input_width() const {
  return layers.empty() ? 0 : layers.front().in();
}

std::size_t ClassifierModel::output_width() const {
  return layers.empty() ? 0 : layers.back().out();
}

std::size_t ClassifierModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Activations per layer; acts[0] is the input batch.
std::vector<Matrix<double>> forward(const ClassifierModel& model,
                                    const Matrix<double>& features) {
  if (features.cols() != model.input_width()) {
    throw Error(ErrorCode::kDimension,
                "feature width " + std::to_string(features.cols()) +
                    " does not match model input " +
                    std::to_string(model.input_width()));
  }
  std::vector<Matrix<double>> acts;
  acts.push_back(features);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    const bool last = l + 1 == model.layers.size();
    const auto& in = acts.back();
    Matrix<double> out(in.rows(), layer.out());
    for (std::size_t r = 0; r < in.rows(); ++r) {
      auto x = in.row(r);
      for (std::size_t o = 0; o < layer.out(); ++o) {
        double z = kernels::dot(layer.weights.row(o), x) + layer.bias[o];
        out(r, o) = last ? sigmoid(z) : std::tanh(z);
      }
    }
    acts.push_back(std::move(out));
  }
  return acts;
}

// `delta` is dL/dz of the output layer; accumulates parameter gradients.
void backward(const ClassifierModel& model,
              const std::vector<Matrix<double>>& acts, Matrix<double> delta,
              ModelGradient& grad) {
  const std::size_t n_layers = model.layers.size();
  grad.weights.clear();
  grad.bias.clear();
  for (const auto& l : model.layers) {
    grad.weights.emplace_back(l.out(), l.in());
    grad.bias.emplace_back(l.out(), 0.0);
  }
  for (std::size_t li = n_layers; li-- > 0;) {
    const auto& layer = model.layers[li];
    const auto& input = acts[li];
    Matrix<double> prev(input.rows(), layer.in());
    for (std::size_t r = 0; r < input.rows(); ++r) {
      auto x = input.row(r);
      auto d = delta.row(r);
      auto p = prev.row(r);
      for (std::size_t o = 0; o < layer.out(); ++o) {
        if (d[o] == 0.0) continue;
        kernels::axpy(d[o], x, grad.weights[li].row(o));
        grad.bias[li][o] += d[o];
        if (li > 0) kernels::axpy(d[o], layer.weights.row(o), p);
      }
    }
    if (li == 0) break;
    // tanh'(z) = 1 - a^2
    for (std::size_t r = 0; r < prev.rows(); ++r) {
      auto a = input.row(r);
      auto p = prev.row(r);
      for (std::size_t j = 0; j < p.size(); ++j) p[j] *= 1.0 - a[j] * a[j];
    }
    delta = std::move(prev);
  }
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double x) {
  auto v = std::bit_cast<std::uint64_t>(x);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view b) : b_(b) {}
  std::uint64_t uint(int bytes) {
    if (b_.size() - pos_ < static_cast<std::size_t>(bytes)) {
      throw Error(ErrorCode::kFormat, "truncated model checkpoint");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(b_[pos_++])) << (8 * i);
    }
    return v;
  }
  double f64() { return std::bit_cast<double>(uint(8)); }
  bool done() const { return pos_ == b_.size(); }

 private:
  std::string_view b_;
  std::size_t pos_ = 0;
};

constexpr std::string_view kModelMagic = "LCPM";

}  // namespace

Matrix<double> predict_probabilities(const ClassifierModel& model,
                                     const Matrix<double>& features) {
  auto acts = forward(model, features);
  return std::move(acts.back());
}

Evaluation evaluate(const ClassifierModel& model, const Matrix<double>& features,
                    const std::vector<std::string>& row_ids, double threshold) {
  Evaluation e;
  e.scores.row_ids = row_ids.empty() ? sequential_ids(features.rows()) : row_ids;
  e.scores.values = predict_probabilities(model, features);
  e.predictions = binarize(e.scores, threshold);
  return e;
}

std::string encode_model(const ClassifierModel& model) {
  std::string out(kModelMagic);
  put_u32(out, static_cast<std::uint32_t>(model.layers.size()));
  for (const auto& l : model.layers) {
    put_u32(out, static_cast<std::uint32_t>(l.in()));
    put_u32(out, static_cast<std::uint32_t>(l.out()));
  }
  for (const auto& l : model.layers) {
    for (double w : l.weights.flat()) put_f64(out, w);
    for (double b : l.bias) put_f64(out, b);
  }
  return out;
}

ClassifierModel decode_model(std::string_view bytes) {
  if (bytes.substr(0, kModelMagic.size()) != kModelMagic) {
    throw Error(ErrorCode::kFormat, "not a model checkpoint (bad magic)");
  }
  ByteReader in(bytes.substr(kModelMagic.size()));
  auto n_layers = in.uint(4);
  std::vector<std::pair<std::size_t, std::size_t>> dims;
  for (std::uint64_t l = 0; l < n_layers; ++l) {
    auto i = in.uint(4);
    auto o = in.uint(4);
    if (!dims.empty() && dims.back().second != i) {
      throw Error(ErrorCode::kFormat, "checkpoint layer widths do not chain");
    }
    dims.emplace_back(i, o);
  }
  ClassifierModel m;
  for (auto [i, o] : dims) {
    DenseLayer layer{Matrix<double>(o, i), std::vector<double>(o)};
    for (auto& w : layer.weights.flat()) w = in.f64();
    for (auto& b : layer.bias) b = in.f64();
    m.layers.push_back(std::move(layer));
  }
  if (!in.done()) throw Error(ErrorCode::kFormat, "trailing bytes in checkpoint");
  return m;
}

void save_model(const std::string& path, const ClassifierModel& model) {
  io::write_file_atomic(path, encode_model(model));
}

ClassifierModel load_model(const std::string& path) {
  return decode_model(io::read_file(path));
}

// ---------------------------------------------------------------------------
// Configuration

void TrainConfig::validate() const {
  loss.validate();
  if (epochs == 0 || batch_size == 0) {
    throw Error(ErrorCode::kConfig, "epochs and batch_size must be positive");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kConfig, "learning_rate must be positive");
  }
  if (!(grad_clip >= 0.0)) {
    throw Error(ErrorCode::kConfig, "grad_clip must be non-negative");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw Error(ErrorCode::kConfig, "momentum must lie in [0, 1)");
  }
  for (auto h : hidden) {
    if (h == 0) throw Error(ErrorCode::kConfig, "hidden widths must be positive");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kConfig, "key '" + key + "': invalid number '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error(ErrorCode::kConfig, "key '" + key + "': expected true or false");
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfig,
                  "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": empty key");
    }
    if (!kv.emplace(key, value).second) {
      throw Error(ErrorCode::kConfig, "duplicate key '" + key + "'");
    }
  }
  return kv;
}

TrainConfig train_config_from(std::map<std::string, std::string>& kv) {
  TrainConfig c;
  auto take = [&](const char* key, auto&& apply) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    apply(it->first, it->second);
    kv.erase(it);
  };
  take("mode", [&](const std::string& k, const std::string& v) {
    if (v == "bce") c.mode = LossMode::kBce;
    else if (v == "bce_lcp") c.mode = LossMode::kBceLcp;
    else throw Error(ErrorCode::kConfig, "key '" + k + "': expected bce or bce_lcp");
  });
  take("compensation_in_training", [&](const std::string& k, const std::string& v) {
    c.compensation_in_training = parse_bool(k, v);
  });
  take("lcp_gradient", [&](const std::string& k, const std::string& v) {
    if (v == "soft") c.lcp_gradient = LcpGradient::kSoft;
    else if (v == "straight_through") c.lcp_gradient = LcpGradient::kStraightThrough;
    else throw Error(ErrorCode::kConfig, "key '" + k + "': expected soft or straight_through");
  });
  take("alpha", [&](const std::string& k, const std::string& v) { c.loss.alpha = parse_number<double>(k, v); });
  take("beta", [&](const std::string& k, const std::string& v) { c.loss.beta = parse_number<double>(k, v); });
  take("lambda", [&](const std::string& k, const std::string& v) { c.loss.lambda = parse_number<double>(k, v); });
  take("threshold", [&](const std::string& k, const std::string& v) { c.loss.threshold = parse_number<double>(k, v); });
  take("epochs", [&](const std::string& k, const std::string& v) { c.epochs = parse_number<std::size_t>(k, v); });
  take("batch_size", [&](const std::string& k, const std::string& v) { c.batch_size = parse_number<std::size_t>(k, v); });
  take("learning_rate", [&](const std::string& k, const std::string& v) { c.learning_rate = parse_number<double>(k, v); });
  take("momentum", [&](const std::string& k, const std::string& v) { c.momentum = parse_number<double>(k, v); });
  take("grad_clip", [&](const std::string& k, const std::string& v) { c.grad_clip = parse_number<double>(k, v); });
  take("seed", [&](const std::string& k, const std::string& v) { c.seed = parse_number<std::uint64_t>(k, v); });
  take("hidden", [&](const std::string& k, const std::string& v) {
    c.hidden.clear();
    std::string_view rest = v;
    while (!rest.empty()) {
      auto comma = rest.find(',');
      auto item = trim(rest.substr(0, comma));
      if (!item.empty()) c.hidden.push_back(parse_number<std::size_t>(k, std::string(item)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  });
  c.validate();
  return c;
}

std::string format_train_config(const TrainConfig& c) {
  std::ostringstream os;
  os << "mode = " << (c.mode == LossMode::kBce ? "bce" : "bce_lcp") << '\n'
     << "compensation_in_training = " << (c.compensation_in_training ? "true" : "false") << '\n'
     << "lcp_gradient = "
     << (c.lcp_gradient == LcpGradient::kSoft ? "soft" : "straight_through") << '\n'
     << "alpha = " << io::format_double(c.loss.alpha) << '\n'
     << "beta = " << io::format_double(c.loss.beta) << '\n'
     << "lambda = " << io::format_double(c.loss.lambda) << '\n'
     << "threshold = " << io::format_double(c.loss.threshold) << '\n'
     << "epochs = " << c.epochs << '\n'
     << "batch_size = " << c.batch_size << '\n'
     << "learning_rate = " << io::format_double(c.learning_rate) << '\n'
     << "momentum = " << io::format_double(c.momentum) << '\n'
     << "grad_clip = " << io::format_double(c.grad_clip) << '\n'
     << "seed = " << c.seed << '\n'
     << "hidden = ";
  for (std::size_t i = 0; i < c.hidden.size(); ++i) os << (i ? "," : "") << c.hidden[i];
  os << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Objective and training loop

BatchObjective batch_objective(const ClassifierModel& model,
                               const AttributeSchema& schema,
                               const TrainConfig& config,
                               const Matrix<double>& features,
                               const BitMatrix& labels, ModelGradient* grad) {
  if (model.output_width() != schema.size() || labels.cols() != schema.size()) {
    throw Error(ErrorCode::kDimension, "model/label width does not match schema '" +
                                           schema.name() + "'");
  }
  auto acts = forward(model, features);
  const auto& probs = acts.back();
  const double lambda =
      config.mode == LossMode::kBceLcp ? config.loss.lambda : 0.0;

  BatchObjective obj;
  obj.bce = bce_loss(probs, labels);

  BitMatrix binary(probs.rows(), probs.cols());
  kernels::threshold_greater(probs.flat(), config.loss.threshold, binary.flat());
  if (config.compensation_in_training) {
    for (std::size_t r = 0; r < probs.rows(); ++r) {
      compensate_in_place(schema, probs.row(r), binary.row(r));
    }
  }
  obj.hard_stats = hard_consistency_stats(schema, binary);
  const double hard_lcp = lcp_loss(obj.hard_stats, config.loss);

  Matrix<double> dprobs;
  if (config.mode == LossMode::kBce) {
    obj.lcp = hard_lcp;
    obj.total = obj.bce;
    if (grad) dprobs = bce_gradient(probs, labels);
  } else {
    Matrix<double> lcp_grad;
    if (config.lcp_gradient == LcpGradient::kSoft) {
      auto soft = soft_lcp_surrogate(schema, probs, config.loss);
      obj.lcp = soft.value;
      lcp_grad = std::move(soft.gradient);
    } else {
      auto st = straight_through_lcp(schema, probs, binary, config.loss);
      obj.lcp = st.value;
      lcp_grad = std::move(st.gradient);
    }
    obj.total = total_loss(obj.bce, obj.lcp, config.loss);
    if (grad) {
      dprobs = Matrix<double>(probs.rows(), probs.cols());
      kernels::axpy(1.0 - lambda, bce_gradient(probs, labels).flat(), dprobs.flat());
      kernels::axpy(lambda, lcp_grad.flat(), dprobs.flat());
    }
  }

  if (grad) {
    // Through the logistic output: dp/dz = p (1 - p).
    auto d = dprobs.flat();
    auto p = probs.flat();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= p[i] * (1.0 - p[i]);
    backward(model, acts, std::move(dprobs), *grad);
  }
  return obj;
}

std::string epoch_log_json(const EpochLog& e) {
  nlohmann::ordered_json j;
  j["epoch"] = e.epoch;
  j["loss"] = e.loss;
  j["bce"] = e.bce;
  j["lcp"] = e.lcp;
  j["p_ex"] = e.p_ex;
  j["p_d"] = e.p_d;
  if (e.val_acc_avg >= 0.0) {
    j["val_acc_avg"] = e.val_acc_avg;
    j["val_failure_ratio"] = e.val_failure_ratio;
  }
  return j.dump();
}

namespace {

// Factor bringing the global gradient norm down to `limit` (0 = off).
double clip_scale(const ModelGradient& g, double limit) {
  if (limit <= 0.0) return 1.0;
  double sq = 0.0;
  for (const auto& w : g.weights) sq += kernels::dot(w.flat(), w.flat());
  for (const auto& b : g.bias) sq += kernels::dot(b, b);
  double norm = std::sqrt(sq);
  return norm > limit ? limit / norm : 1.0;
}

}  // namespace

TrainResult train(const TrainConfig& config, const AttributeSchema& schema,
                  const DataSplit& train_data, const DataSplit* val) {
  config.validate();
  if (train_data.labels.cols() != schema.size()) {
    throw Error(ErrorCode::kDimension, "training labels do not match schema '" +
                                           schema.name() + "'");
  }
  if (train_data.rows() == 0) throw Error(ErrorCode::kInput, "empty training set");

  std::vector<std::size_t> widths{train_data.features.cols()};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(schema.size());

  TrainResult result;
  result.model = ClassifierModel::init(widths, config.seed);
  auto& model = result.model;

  ModelGradient velocity;
  for (const auto& l : model.layers) {
    velocity.weights.emplace_back(l.out(), l.in());
    velocity.bias.emplace_back(l.out(), 0.0);
  }

  std::mt19937_64 rng(config.seed ^ 0xD1B54A32D192ED03ULL);
  std::vector<std::size_t> order(train_data.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t in_width = train_data.features.cols();
  const std::size_t k = schema.size();

  ModelGradient grad;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochLog log;
    log.epoch = epoch;
    std::size_t batches = 0;
    double p_d_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      std::size_t n = std::min(config.batch_size, order.size() - start);
      Matrix<double> xb(n, in_width);
      BitMatrix yb(n, k);
      for (std::size_t i = 0; i < n; ++i) {
        auto src = order[start + i];
        auto xs = train_data.features.row(src);
        auto ys = train_data.labels.row(src);
        std::copy(xs.begin(), xs.end(), xb.row(i).begin());
        std::copy(ys.begin(), ys.end(), yb.row(i).begin());
      }
      auto obj = batch_objective(model, schema, config, xb, yb, &grad);
      if (!std::isfinite(obj.total)) {
        throw Error(ErrorCode::kDivergence,
                    "non-finite loss in epoch " + std::to_string(epoch));
      }
      const double step = config.learning_rate * clip_scale(grad, config.grad_clip);
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto v = velocity.weights[l].flat();
        auto g = grad.weights[l].flat();
        for (std::size_t i = 0; i < v.size(); ++i) {
          v[i] = config.momentum * v[i] - step * g[i];
        }
        kernels::axpy(1.0, v, model.layers[l].weights.flat());
        auto& vb = velocity.bias[l];
        auto& gb = grad.bias[l];
        for (std::size_t i = 0; i < vb.size(); ++i) {
          vb[i] = config.momentum * vb[i] - step * gb[i];
        }
        kernels::axpy(1.0, vb, model.layers[l].bias);
      }
      log.loss += obj.total;
      log.bce += obj.bce;
      log.lcp += obj.lcp;
      log.p_ex += obj.hard_stats.p_ex;
      p_d_sum += obj.hard_stats.p_d;
      ++batches;
    }
    const double inv = 1.0 / static_cast<double>(batches);
    log.loss *= inv;
    log.bce *= inv;
    log.lcp *= inv;
    log.p_ex *= inv;
    log.p_d = p_d_sum * inv;
    if (val != nullptr && val->rows() > 0) {
      auto e = evaluate(model, val->features, val->ids, config.loss.threshold);
      BinaryMatrix truth{val->ids, val->labels};
      log.val_acc_avg = attribute_accuracy(e.predictions, truth).acc_avg;
      log.val_failure_ratio = audit_binary(schema, e.predictions).failure_ratio;
    }
    result.log.push_back(log);
  }
  return result;
}

}  // namespace lcpkit
