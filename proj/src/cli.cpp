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

#include "lcpkit/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>

#include "lcpkit/audit.hpp"
#include "lcpkit/compensate.hpp"
#include "lcpkit/io.hpp"
#include "lcpkit/kernels.hpp"
#include "lcpkit/metrics.hpp"
#include "lcpkit/recognition.hpp"
#include "lcpkit/schema.hpp"
#include "lcpkit/trainer.hpp"
#include "parallel.hpp"

namespace lcpkit::cli {

namespace {

namespace fs = std::filesystem;

enum class Verbosity { kQuiet, kInfo, kDebug };

Verbosity verbosity_from_env() {
  const char* v = std::getenv("LCPKIT_LOG");
  if (v == nullptr) return Verbosity::kInfo;
  std::string s(v);
  if (s == "quiet" || s == "0") return Verbosity::kQuiet;
  if (s == "debug" || s == "2") return Verbosity::kDebug;
  return Verbosity::kInfo;
}

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err), level_(verbosity_from_env()) {}
  void info(const std::string& msg) const {
    if (level_ >= Verbosity::kInfo) err_ << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level_ >= Verbosity::kDebug) err_ << "debug: " << msg << '\n';
  }

 private:
  std::ostream& err_;
  Verbosity level_;
};

struct Common {
  std::string schema = "builtin:fh37k";
  double threshold = 0.5;
  unsigned threads = 0;

  unsigned worker_count() const {
    return threads == 0 ? detail::default_threads() : threads;
  }
};

void add_schema(CLI::App* cmd, Common& c, bool required = false) {
  auto* opt = cmd->add_option("--schema", c.schema,
                              "constraint DSL file or builtin:fh37k");
  if (required) opt->required();
}

void add_threshold(CLI::App* cmd, Common& c) {
  cmd->add_option("--threshold", c.threshold, "binarization threshold (score > t)")
      ->capture_default_str();
}

void add_threads(CLI::App* cmd, Common& c) {
  cmd->add_option("--threads", c.threads, "worker cap; 0 = all cores")
      ->check(CLI::NonNegativeNumber);
}

Matrix<double> features_matching(const io::CsvTable& table,
                                 const std::vector<std::string>& ids,
                                 const std::string& what) {
  if (table.data.row_ids != ids) {
    throw Error(ErrorCode::kInput, what + ": feature and label row ids differ");
  }
  return table.data.values;
}

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  fs::path path(p);
  return path.is_absolute() ? p : (base / path).string();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"lcpkit: logical-consistency tools for multi-label attribute prediction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lcpkit 1.0.0");
  Log log(err);
  Common common;

  // schema-validate
  bool print_schema = false;
  std::string schema_out;
  auto* validate = app.add_subcommand("schema-validate", "parse and validate a schema");
  add_schema(validate, common, true);
  validate->add_flag("--print", print_schema, "print the canonical form");
  validate->add_option("--out", schema_out, "write the canonical form to a file");

  // audit
  std::string scores_path, out_path;
  auto* audit = app.add_subcommand("audit", "count incomplete and impossible predictions");
  add_schema(audit, common);
  audit->add_option("--scores", scores_path, "score CSV")->required();
  audit->add_option("--out", out_path, "report JSON (default: stdout)");
  add_threshold(audit, common);
  add_threads(audit, common);

  // compensate
  auto* comp = app.add_subcommand("compensate", "binarize and fill empty exhaustive groups");
  add_schema(comp, common);
  comp->add_option("--scores", scores_path, "score CSV")->required();
  comp->add_option("--out", out_path, "binary CSV output")->required();
  add_threshold(comp, common);

  // synth
  SyntheticDatasetSpec synth_spec;
  std::string out_dir;
  auto* synth = app.add_subcommand("synth", "generate a synthetic labelled dataset");
  add_schema(synth, common);
  synth->add_option("--out-dir", out_dir, "output directory")->required();
  synth->add_option("--seed", synth_spec.seed)->capture_default_str();
  synth->add_option("--n-train", synth_spec.n_train)->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--n-val", synth_spec.n_val)->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--n-test", synth_spec.n_test)->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--feature-dim", synth_spec.feature_dim, "0 = attribute count")->capture_default_str();
  synth->add_option("--noise", synth_spec.noise_sigma)->capture_default_str()->check(CLI::NonNegativeNumber);
  synth->add_option("--distractors", synth_spec.distractor_dims)->capture_default_str();

  // train
  std::string config_path, features_path, labels_path, val_features, val_labels,
      model_out, log_out, mode_flag;
  std::optional<std::uint64_t> seed_flag;
  auto* trn = app.add_subcommand("train", "train the desk-scale classifier");
  trn->add_option("--config", config_path, "key = value configuration file");
  trn->add_option("--schema", common.schema, "overrides config 'schema'");
  trn->add_option("--features", features_path, "overrides config 'train_features'");
  trn->add_option("--labels", labels_path, "overrides config 'train_labels'");
  trn->add_option("--val-features", val_features);
  trn->add_option("--val-labels", val_labels);
  trn->add_option("--out", model_out, "overrides config 'checkpoint'");
  trn->add_option("--log", log_out, "overrides config 'log' (JSON lines)");
  trn->add_option("--seed", seed_flag, "overrides config 'seed'");
  trn->add_option("--mode", mode_flag, "overrides config 'mode'")
      ->check(CLI::IsMember({"bce", "bce_lcp"}));

  // eval
  std::string model_path, scores_out, preds_out;
  bool eval_compensate = false;
  auto* ev = app.add_subcommand("eval", "score a feature file with a checkpoint");
  ev->add_option("--model", model_path)->required();
  ev->add_option("--features", features_path)->required();
  add_schema(ev, common);
  add_threshold(ev, common);
  ev->add_option("--scores-out", scores_out, "probability CSV");
  ev->add_option("--preds-out", preds_out, "binary prediction CSV");
  ev->add_flag("--compensate", eval_compensate, "apply label compensation to predictions");

  // metrics
  std::string preds_path, metrics_mode = "both", table_out;
  auto* met = app.add_subcommand("metrics", "attribute accuracies");
  add_schema(met, common);
  met->add_option("--preds", preds_path, "binary prediction CSV")->required();
  met->add_option("--labels", labels_path, "ground-truth CSV")->required();
  met->add_option("--mode", metrics_mode)->check(CLI::IsMember({"plain", "consistency", "both"}))
      ->capture_default_str();
  met->add_option("--out", out_path, "report JSON (default: stdout)");
  met->add_option("--table", table_out, "aligned text table");

  // fmr-report
  std::string emb_path, reference = "WM", hist_out, matcher;
  double target_fmr = 1e-4;
  double min_conf = 0.9;
  std::size_t bins = 40;
  auto* fmr = app.add_subcommand("fmr-report", "per-category false match rates");
  fmr->add_option("--embeddings", emb_path, "EMB1 embedding file")->required();
  fmr->add_option("--reference", reference, "calibration demographic")->capture_default_str();
  fmr->add_option("--target-fmr", target_fmr)->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  fmr->add_option("--min-conf", min_conf, "beard-area confidence filter")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  fmr->add_option("--out", out_path, "report JSON (default: stdout)");
  fmr->add_option("--table", table_out, "text table");
  fmr->add_option("--histograms", hist_out, "histogram CSV");
  fmr->add_option("--bins", bins)->capture_default_str()->check(CLI::Range(2, 100000));
  fmr->add_option("--matcher", matcher, "label stored in the report");
  add_threads(fmr, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  auto emit = [&](const std::string& path, const std::string& text) {
    if (path.empty()) {
      out << text;
      if (!text.empty() && text.back() != '\n') out << '\n';
    } else {
      io::write_file_atomic(path, text);
    }
  };

  try {
    log.debug(std::string("kernels: ") + std::string(kernels::isa_name(kernels::active_isa())));

    if (*validate) {
      auto schema = load_schema(common.schema);
      log.info("schema '" + schema.name() + "': " + std::to_string(schema.size()) +
               " attributes, " + std::to_string(schema.groups().size()) + " groups, " +
               std::to_string(schema.exclusion_rules().size()) + " exclusion rules, " +
               std::to_string(schema.dependency_rules().size()) + " dependency rules");
      if (print_schema) out << serialize(schema);
      if (!schema_out.empty()) io::write_file_atomic(schema_out, serialize(schema));
      return kOk;
    }

    if (*audit) {
      auto schema = load_schema(common.schema);
      auto scores = io::read_scores(scores_path, schema);
      auto report = audit_dataset(schema, scores, common.threshold, common.worker_count());
      emit(out_path, audit_report_json(report) + "\n");
      log.info("audit: " + std::to_string(report.n_incomplete) + " incomplete, " +
               std::to_string(report.n_impossible) + " impossible of " +
               std::to_string(report.n_total));
      return kOk;
    }

    if (*comp) {
      auto schema = load_schema(common.schema);
      auto scores = io::read_scores(scores_path, schema);
      auto result = compensate_dataset(schema, scores, common.threshold);
      io::write_file_atomic(out_path, io::format_csv(schema.attributes(), result));
      return kOk;
    }

    if (*synth) {
      auto schema = load_schema(common.schema);
      auto ds = generate_synthetic(schema, synth_spec);
      fs::create_directories(out_dir);
      auto write_split = [&](const std::string& name, const DataSplit& s) {
        std::vector<std::string> cols;
        for (std::size_t i = 0; i < s.features.cols(); ++i) cols.push_back("f" + std::to_string(i));
        io::write_file_atomic((fs::path(out_dir) / (name + "_features.csv")).string(),
                              io::format_csv(cols, ScoreMatrix{s.ids, s.features}));
        io::write_file_atomic((fs::path(out_dir) / (name + "_labels.csv")).string(),
                              io::format_csv(schema.attributes(), BinaryMatrix{s.ids, s.labels}));
      };
      write_split("train", ds.train);
      write_split("val", ds.val);
      write_split("test", ds.test);
      log.info("synth: wrote " + out_dir + " (" + std::to_string(ds.rejected_draws) +
               " inconsistent label draws rejected)");
      return kOk;
    }

    if (*trn) {
      std::map<std::string, std::string> kv;
      fs::path base;
      if (!config_path.empty()) {
        kv = parse_key_values(io::read_file(config_path));
        base = fs::path(config_path).parent_path();
      }
      auto take_path = [&](const char* key, std::string& flag) {
        auto it = kv.find(key);
        if (it != kv.end()) {
          if (flag.empty()) flag = resolve(base, it->second);
          kv.erase(it);
        }
      };
      std::string schema_spec;
      take_path("train_features", features_path);
      take_path("train_labels", labels_path);
      take_path("val_features", val_features);
      take_path("val_labels", val_labels);
      take_path("checkpoint", model_out);
      take_path("log", log_out);
      if (auto it = kv.find("schema"); it != kv.end()) {
        if (trn->count("--schema") == 0) {
          common.schema = it->second.rfind("builtin:", 0) == 0 ? it->second
                                                               : resolve(base, it->second);
        }
        kv.erase(it);
      }
      if (!mode_flag.empty()) kv["mode"] = mode_flag;
      if (seed_flag) kv["seed"] = std::to_string(*seed_flag);
      auto config = train_config_from(kv);
      if (!kv.empty()) {
        throw Error(ErrorCode::kConfig, "unknown configuration key '" + kv.begin()->first + "'");
      }
      if (features_path.empty() || labels_path.empty() || model_out.empty()) {
        throw Error(ErrorCode::kConfig,
                    "train needs train_features, train_labels and checkpoint");
      }
      auto schema = load_schema(common.schema);
      DataSplit train_split;
      auto labels = io::read_binary(labels_path, schema);
      train_split.ids = labels.row_ids;
      train_split.labels = labels.values;
      train_split.features = features_matching(io::read_csv(features_path), labels.row_ids,
                                               features_path);
      std::optional<DataSplit> val_split;
      if (!val_features.empty() && !val_labels.empty()) {
        auto vl = io::read_binary(val_labels, schema);
        val_split = DataSplit{vl.row_ids,
                              features_matching(io::read_csv(val_features), vl.row_ids,
                                                val_features),
                              vl.values};
      }
      auto result = train(config, schema, train_split, val_split ? &*val_split : nullptr);
      save_model(model_out, result.model);
      std::string lines;
      for (const auto& e : result.log) lines += epoch_log_json(e) + "\n";
      if (!log_out.empty()) io::write_file_atomic(log_out, lines);
      const auto& last = result.log.back();
      log.info("train: " + std::to_string(result.log.size()) + " epochs, final loss " +
               io::format_double(last.loss));
      return kOk;
    }

    if (*ev) {
      auto model = load_model(model_path);
      auto table = io::read_csv(features_path);
      auto e = evaluate(model, table.data.values, table.data.row_ids, common.threshold);
      std::optional<AttributeSchema> schema;
      if (eval_compensate || ev->count("--schema") > 0) schema = load_schema(common.schema);
      if (schema && schema->size() != model.output_width()) {
        throw Error(ErrorCode::kDimension, "model output width does not match schema");
      }
      if (eval_compensate) {
        for (std::size_t r = 0; r < e.predictions.rows(); ++r) {
          compensate_in_place(*schema, e.scores.values.row(r), e.predictions.values.row(r));
        }
      }
      std::vector<std::string> cols;
      if (schema) {
        cols = schema->attributes();
      } else {
        for (std::size_t i = 0; i < model.output_width(); ++i) cols.push_back("attr" + std::to_string(i));
      }
      if (!scores_out.empty()) io::write_file_atomic(scores_out, io::format_csv(cols, e.scores));
      if (!preds_out.empty()) io::write_file_atomic(preds_out, io::format_csv(cols, e.predictions));
      if (scores_out.empty() && preds_out.empty()) out << io::format_csv(cols, e.scores);
      return kOk;
    }

    if (*met) {
      auto schema = load_schema(common.schema);
      auto preds = io::read_binary(preds_path, schema);
      auto labels = io::read_binary(labels_path, schema);
      if (preds.row_ids != labels.row_ids) {
        throw Error(ErrorCode::kInput, "prediction and label row ids differ");
      }
      std::vector<MetricsReport> reports;
      std::vector<std::pair<std::string, MetricsReport>> rows;
      if (metrics_mode != "consistency") {
        reports.push_back(attribute_accuracy(preds, labels, schema.attributes()));
        rows.emplace_back(fs::path(preds_path).stem().string(), reports.back());
      }
      if (metrics_mode != "plain") {
        reports.push_back(consistency_enforced_accuracy(schema, preds, labels));
        rows.emplace_back(fs::path(preds_path).stem().string(), reports.back());
      }
      emit(out_path, metrics_json(reports) + "\n");
      if (!table_out.empty()) io::write_file_atomic(table_out, metrics_table(rows));
      return kOk;
    }

    if (*fmr) {
      auto ref = demographic_code(reference);
      if (!ref) throw Error(ErrorCode::kInput, "unknown demographic '" + reference + "'");
      auto set = filter_high_confidence(load_embeddings(emb_path), min_conf);
      std::vector<PairScores> per_demo;
      for (auto d : demographics_in(set)) {
        per_demo.push_back(pair_scores(set, d, common.worker_count()));
      }
      auto ref_it = std::find_if(per_demo.begin(), per_demo.end(),
                                 [&](const PairScores& p) { return p.demographic == *ref; });
      if (ref_it == per_demo.end()) {
        throw Error(ErrorCode::kInput, "no records for reference demographic " + reference);
      }
      auto cal = calibrate_threshold(*ref_it, target_fmr);
      auto report = fmr_by_category(per_demo, cal, *ref, matcher);
      emit(out_path, fmr_report_json(report) + "\n");
      if (!table_out.empty()) {
        io::write_file_atomic(table_out, fmr_table(std::span<const FmrReport>(&report, 1)));
      }
      if (!hist_out.empty()) {
        std::vector<Histogram> all;
        for (const auto& ps : per_demo) {
          auto h = distribution_histograms(ps, bins);
          all.insert(all.end(), h.begin(), h.end());
        }
        io::write_file_atomic(hist_out, histograms_csv(all));
      }
      log.info("fmr-report: threshold " + io::format_double(cal.threshold) +
               ", reference FMR " + io::format_double(cal.achieved_fmr));
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << code_name(e.code()) << ": " << e.what() << '\n';
    return kDomainError;
  } catch (const std::exception& e) {
    err << "error: E_INTERNAL: " << e.what() << '\n';
    return kDomainError;
  }
  return kUsageError;
}

}  // namespace lcpkit::cli
