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

#include <filesystem>
#include <json.hpp>
#include <random>
#include <sstream>

#include "lcpkit/audit.hpp"
#include "lcpkit/cli.hpp"
#include "lcpkit/io.hpp"
#include "lcpkit/recognition.hpp"
#include "lcpkit/schema.hpp"

using namespace lcpkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "lcpkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int status = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("lcpkit_cli_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

const std::string kSchemaFile = std::string(LCPKIT_SOURCE_DIR) + "/schemas/fh37k.dsl";

std::string random_scores(std::size_t n, unsigned seed) {
  const auto& s = fh37k_default();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  ScoreMatrix m{{}, Matrix<double>(n, s.size())};
  for (std::size_t r = 0; r < n; ++r) {
    m.row_ids.push_back("img" + std::to_string(r));
    for (auto& v : m.values.row(r)) v = u(rng);
  }
  return io::format_csv(s.attributes(), m);
}

bool leftover_temp_files(const fs::path& dir) {
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().filename().string().find(".tmp") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("shipped schema file matches the builtin") {
  auto r = run({"schema-validate", "--schema", kSchemaFile, "--print"});
  REQUIRE(r.status == cli::kOk);
  CHECK(r.out == serialize(fh37k_default()));
  CHECK(parse_schema(io::read_file(kSchemaFile)) == fh37k_default());
  auto b = run({"schema-validate", "--schema", "builtin:fh37k", "--print"});
  CHECK(b.out == r.out);
}

TEST_CASE("audit dispatches to the library") {
  TempDir dir;
  io::write_file_atomic(dir / "preds.csv", random_scores(300, 5));
  auto r = run({"audit", "--schema", kSchemaFile, "--scores", dir / "preds.csv",
                "--threshold", "0.5", "--out", dir / "report.json"});
  REQUIRE(r.status == cli::kOk);
  auto scores = io::read_scores(dir / "preds.csv", fh37k_default());
  auto expected = audit_report_json(audit_dataset(fh37k_default(), scores, 0.5, 1)) + "\n";
  CHECK(io::read_file(dir / "report.json") == expected);
  auto j = nlohmann::json::parse(io::read_file(dir / "report.json"));
  CHECK(j["n_total"] == 300);

  auto builtin = run({"audit", "--scores", dir / "preds.csv", "--threads", "3"});
  REQUIRE(builtin.status == cli::kOk);
  CHECK(builtin.out == expected);
  CHECK_FALSE(leftover_temp_files(dir.path()));
}

TEST_CASE("usage errors exit with status 2") {
  auto missing = run({"audit", "--schema", kSchemaFile});
  CHECK(missing.status == cli::kUsageError);
  CHECK(missing.err.find("--scores") != std::string::npos);
  CHECK(run({}).status == cli::kUsageError);
  CHECK(run({"frobnicate"}).status == cli::kUsageError);
  CHECK(run({"audit", "--scores", "x.csv", "--threads", "-1"}).status == cli::kUsageError);
  CHECK(run({"metrics", "--preds", "a", "--labels", "b", "--mode", "weird"}).status ==
        cli::kUsageError);
  CHECK(run({"--version"}).status == cli::kOk);
}

TEST_CASE("domain errors exit with status 1 and a stable code") {
  TempDir dir;
  auto missing = run({"audit", "--scores", dir / "nope.csv"});
  CHECK(missing.status == cli::kDomainError);
  CHECK(missing.err.rfind("error: E_IO: ", 0) == 0);

  io::write_file_atomic(dir / "bad.dsl", "schema x\nattrs a b\nrequire a : c\n");
  auto bad = run({"schema-validate", "--schema", dir / "bad.dsl"});
  CHECK(bad.status == cli::kDomainError);
  CHECK(bad.err.rfind("error: E_SCHEMA_UNDECLARED: ", 0) == 0);
  CHECK(std::count(bad.err.begin(), bad.err.end(), '\n') == 1);

  io::write_file_atomic(dir / "short.csv", "id,clean_shaven\nr0,0.3\n");
  auto dim = run({"audit", "--scores", dir / "short.csv"});
  CHECK(dim.status == cli::kDomainError);
  CHECK(dim.err.rfind("error: E_", 0) == 0);

  io::write_file_atomic(dir / "empty.bin", "");
  auto emb = run({"fmr-report", "--embeddings", dir / "empty.bin"});
  CHECK(emb.status == cli::kDomainError);
  CHECK(emb.err.rfind("error: E_FORMAT: ", 0) == 0);
}

TEST_CASE("compensate writes a complete binary matrix") {
  TempDir dir;
  io::write_file_atomic(dir / "preds.csv", random_scores(200, 8));
  REQUIRE(run({"compensate", "--scores", dir / "preds.csv", "--out", dir / "fixed.csv"}).status ==
          cli::kOk);
  auto fixed = io::read_binary(dir / "fixed.csv", fh37k_default());
  auto report = audit_binary(fh37k_default(), fixed);
  CHECK(report.n_total == 200);
  CHECK(report.n_incomplete == 0);
}

TEST_CASE("synth, train, eval and metrics chain together") {
  TempDir dir;
  auto data = dir / "data";
  REQUIRE(run({"synth", "--out-dir", data, "--n-train", "200", "--n-val", "50", "--n-test", "60",
               "--seed", "11"})
              .status == cli::kOk);
  for (auto name : {"train", "val", "test"}) {
    CHECK(fs::exists(data + "/" + name + "_features.csv"));
    CHECK(fs::exists(data + "/" + name + "_labels.csv"));
  }
  auto labels = io::read_binary(data + "/test_labels.csv", fh37k_default());
  CHECK(labels.rows() == 60);
  CHECK(audit_binary(fh37k_default(), labels).n_consistent == 60);

  io::write_file_atomic(dir / "cfg.txt",
                        "# small run\n"
                        "schema = " + kSchemaFile + "\n"
                        "train_features = data/train_features.csv\n"
                        "train_labels = data/train_labels.csv\n"
                        "val_features = data/val_features.csv\n"
                        "val_labels = data/val_labels.csv\n"
                        "log = log.jsonl\n"
                        "mode = bce_lcp\nepochs = 3\nbatch_size = 32\nhidden = 16\n"
                        "learning_rate = 0.1\ngrad_clip = 1\nseed = 4\n");
  REQUIRE(run({"train", "--config", dir / "cfg.txt", "--out", dir / "m1.bin"}).status == cli::kOk);
  REQUIRE(run({"train", "--config", dir / "cfg.txt", "--out", dir / "m2.bin"}).status == cli::kOk);
  CHECK(io::read_file(dir / "m1.bin") == io::read_file(dir / "m2.bin"));
  auto log_text = io::read_file(dir / "log.jsonl");
  CHECK(std::count(log_text.begin(), log_text.end(), '\n') == 3);

  REQUIRE(run({"train", "--config", dir / "cfg.txt", "--out", dir / "m3.bin", "--seed", "5"})
              .status == cli::kOk);
  CHECK(io::read_file(dir / "m3.bin") != io::read_file(dir / "m1.bin"));
  CHECK(run({"train", "--config", dir / "cfg.txt", "--out", dir / "nested/deeper/m4.bin"})
            .status == cli::kOk);
  CHECK(io::read_file(dir / "nested/deeper/m4.bin") == io::read_file(dir / "m1.bin"));

  REQUIRE(run({"eval", "--model", dir / "m1.bin", "--features", data + "/test_features.csv",
               "--schema", "builtin:fh37k", "--compensate", "--scores-out", dir / "scores.csv",
               "--preds-out", dir / "preds.csv"})
              .status == cli::kOk);
  auto preds = io::read_binary(dir / "preds.csv", fh37k_default());
  CHECK(audit_binary(fh37k_default(), preds).n_incomplete == 0);
  auto scores = io::read_scores(dir / "scores.csv", fh37k_default());
  for (auto v : scores.values.flat()) CHECK((v > 0.0 && v < 1.0));

  auto met = run({"metrics", "--preds", dir / "preds.csv", "--labels", data + "/test_labels.csv",
                  "--table", dir / "table.txt"});
  REQUIRE(met.status == cli::kOk);
  auto j = nlohmann::json::parse(met.out);
  REQUIRE(j.is_array());
  CHECK(j.size() == 2);
  CHECK(fs::exists(dir / "table.txt"));
  CHECK_FALSE(leftover_temp_files(dir.path()));

  io::write_file_atomic(dir / "typo.txt", "epocs = 3\n");
  auto typo = run({"train", "--config", dir / "typo.txt"});
  CHECK(typo.status == cli::kDomainError);
  CHECK(typo.err.find("E_CONFIG") != std::string::npos);
  CHECK(typo.err.find("epocs") != std::string::npos);
}

TEST_CASE("fmr-report renders every category") {
  TempDir dir;
  EmbeddingSet set;
  set.dim = 8;
  std::mt19937_64 rng(3);
  std::normal_distribution<float> g(0.0f, 1.0f);
  for (int id = 0; id < 150; ++id) {
    for (int k = 0; k < 2; ++k) {
      EmbeddingRecord rec;
      rec.image_id = "i" + std::to_string(id) + "_" + std::to_string(k);
      rec.subject_id = "s" + std::to_string(id);
      rec.demographic = static_cast<std::uint8_t>(id % 2);
      rec.area = static_cast<BeardArea>((id + k) % 3);
      rec.confidence = 0.95f;
      for (std::uint32_t d = 0; d < set.dim; ++d) rec.features.push_back(g(rng));
      set.records.push_back(std::move(rec));
    }
  }
  save_embeddings(dir / "emb.bin", set);
  auto r = run({"fmr-report", "--embeddings", dir / "emb.bin", "--reference", "WM",
                "--target-fmr", "0.001", "--table", dir / "table.txt", "--histograms",
                dir / "hist.csv", "--bins", "20"});
  REQUIRE(r.status == cli::kOk);
  auto table = io::read_file(dir / "table.txt");
  for (auto c : kPairCategories) {
    CHECK(table.find(std::string(pair_category_name(c))) != std::string::npos);
  }
  CHECK(table.find("WM") != std::string::npos);
  CHECK(table.find("BM") != std::string::npos);
  CHECK(nlohmann::json::parse(r.out).contains("threshold"));
  CHECK(io::read_file(dir / "hist.csv").rfind("demographic", 0) == 0);

  auto unknown = run({"fmr-report", "--embeddings", dir / "emb.bin", "--reference", "XX"});
  CHECK(unknown.status == cli::kDomainError);
}
