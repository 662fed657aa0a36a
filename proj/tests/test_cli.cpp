/* Copyright 2026 The spkcls Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("spkcls-cli-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Runs the CLI with stdout and stderr redirected into `log`; returns the
// exit status.
int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(SPKCLS_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string kData = SPKCLS_TEST_DATA;

TEST_CASE("usage errors") {
  TempDir t("usage");
  CHECK(run("train --bogus", t.path / "log") == 2);
  CHECK(run("", t.path / "log") == 2);
  CHECK(run("--help", t.path / "log") == 0);
  CHECK(run("eval", t.path / "log") == 2);
  CHECK(run("--isa scalar sweep-gate --temporal x.jsonl --content y.jsonl --g-grid 0:0.5:3",
            t.path / "log") != 0);
}

TEST_CASE("build-corpus rejects an empty directory") {
  TempDir t("empty");
  fs::create_directories(t.path / "in");
  CHECK(run("build-corpus --data " + (t.path / "in").string() + " --out " +
                (t.path / "out").string(),
            t.path / "log") == 1);
  CHECK(slurp(t.path / "log").find("error") != std::string::npos);
}

TEST_CASE("eval on the three-sample prediction fixture") {
  TempDir t("eval");
  REQUIRE(run("eval --predictions " + kData + "/three.predictions.jsonl --out " +
                  t.path.string(),
              t.path / "log") == 0);
  const std::string rec = slurp(t.path / "report.records");
  CHECK(rec.find("three.predictions\tmacro-f1=0.66666666666666663") != std::string::npos);
  CHECK(rec.find("three.predictions\tacc=0.66666666666666663") != std::string::npos);
  CHECK(rec.find("three.predictions\tmicro-f1=0.66666666666666663") != std::string::npos);
  CHECK(rec.find("three.predictions\tmrr=0.83333333333333337") != std::string::npos);
  auto manifest = nlohmann::json::parse(slurp(t.path / "manifest.json"));
  CHECK(manifest.at("command") == "eval");
  CHECK(fs::exists(t.path / "report.txt"));
}

TEST_CASE("sweep-gate on degenerate predictions picks g = 0") {
  TempDir t("sweep");
  const std::string u = kData + "/uniform.predictions.jsonl";
  REQUIRE(run("sweep-gate --temporal " + u + " --content " + u + " --g-grid 0:0.25:1 --out " +
                  t.path.string(),
              t.path / "log") == 0);
  const std::string table = slurp(t.path / "sweep.tsv");
  CHECK(table.find("# best g for acc: 0.0000") != std::string::npos);
  CHECK(table.find("# best g for macro-f1: 0.0000") != std::string::npos);
  CHECK(run("sweep-gate --temporal " + u + " --content " + kData +
                "/three.predictions.jsonl",
            t.path / "log") == 1);
}

TEST_CASE("pipeline: synth, build, train, predict, eval") {
  TempDir t("pipe");
  const fs::path raw = t.path / "raw", corpus = t.path / "corpus", model = t.path / "model";
  REQUIRE(run("synth --kind temporal --episodes 12 --seed 2 --out " + raw.string(),
              t.path / "log") == 0);
  CHECK(fs::exists(raw / "keywords.json"));
  REQUIRE(run("build-corpus --data " + raw.string() + " --out " + corpus.string() + " --seed 1",
              t.path / "log") == 0);
  for (const char* f : {"train.jsonl", "validation.jsonl", "test.jsonl", "vocab.json",
                        "stats.json", "stats.txt", "manifest.json"}) {
    CHECK(fs::exists(corpus / f));
  }

  // Same seed, same corpus.
  const fs::path again = t.path / "again";
  REQUIRE(run("build-corpus --data " + raw.string() + " --out " + again.string() + " --seed 1",
              t.path / "log") == 0);
  CHECK(slurp(corpus / "stats.json") == slurp(again / "stats.json"));
  CHECK(slurp(corpus / "train.jsonl") == slurp(again / "train.jsonl"));

  REQUIRE(run("train --data " + corpus.string() + " --out " + model.string() +
                  " --model temporal --dim 8 --max-epochs 2 --dropout 0 --seed 3",
              t.path / "log") == 0);
  CHECK(fs::exists(model / "model.ckpt"));
  CHECK(fs::exists(model / "best-acc.ckpt"));
  CHECK(slurp(model / "training_log.tsv").find("temporal\t0\t") != std::string::npos);

  const fs::path preds = t.path / "preds.jsonl";
  REQUIRE(run("predict --data " + corpus.string() + " --checkpoint " +
                  (model / "model.ckpt").string() + " --out " + preds.string(),
              t.path / "log") == 0);
  std::ifstream in(preds);
  std::string header;
  std::getline(in, header);
  CHECK(nlohmann::json::parse(header).at("format") == "spkcls-predictions");
  std::string row;
  REQUIRE(std::getline(in, row));
  auto j = nlohmann::json::parse(row);
  CHECK(j.contains("probs"));
  CHECK(j.contains("gold"));

  REQUIRE(run("eval --data " + corpus.string() + " --checkpoint " +
                  (model / "model.ckpt").string() + " --predictions " + preds.string() +
                  " --out " + (t.path / "report").string(),
              t.path / "log") == 0);
  const std::string rec = slurp(t.path / "report" / "report.records");
  CHECK(rec.find("Random guess\tmrr=NA") != std::string::npos);
  // The checkpoint and its prediction file score the same.
  std::istringstream lines(rec);
  std::string line, model_acc, preds_acc;
  while (std::getline(lines, line)) {
    if (line.rfind("model\tacc=", 0) == 0) model_acc = line.substr(6);
    if (line.rfind("preds\tacc=", 0) == 0) preds_acc = line.substr(6);
  }
  CHECK(!model_acc.empty());
  CHECK(model_acc == preds_acc);

  CHECK(run("eval --data " + corpus.string() + " --checkpoint " + (t.path / "missing.ckpt").string(),
            t.path / "log") == 1);
}

}  // namespace
