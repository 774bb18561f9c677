/*
 * Copyright 2026 The wmil Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"

namespace {

using wmil::testing::TempDir;

std::string quote(const std::string& s) { return "'" + s + "'"; }

// Runs the CLI with stdout sent to `out_file` (or discarded) and returns its
// exit status.
int run_cli(const std::string& args, const std::string& out_file = "") {
  const std::string cmd = quote(WMIL_CLI_PATH) + " " + args + " >" +
                          (out_file.empty() ? "/dev/null" : quote(out_file)) +
                          " 2>/dev/null";
  const int raw = std::system(cmd.c_str());
  REQUIRE(raw != -1);
  REQUIRE(WIFEXITED(raw));
  return WEXITSTATUS(raw);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

// A small corpus plus a quick training config inside `dir`.
void prepare(const TempDir& dir) {
  write(dir / "corpus.spec",
        "n_positive = 4\nn_negative = 4\nimage_size = 32\n"
        "glyph_size_range = 8,16\nseed = 11\n");
  write(dir / "train.cfg",
        "input_size = 8\nepochs = 1\nbatch_bags = 2\nsubsample_k = 4\n"
        "regions_per_positive = 8\nval_fraction = 0\nseed = 3\n");
  REQUIRE(run_cli("gen-data --spec " + quote((dir / "corpus.spec").string()) +
                  " --out " + quote((dir / "data").string())) == 0);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 1") {
  CHECK(run_cli("") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("train --manifest m.jsonl") == 1);
  CHECK(run_cli("train --manifest m --config c --out o --mode max_pooling") == 1);
  CHECK(run_cli("eval --manifest m --model x --report r --threshold 1.5") == 1);
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("bad configs are usage errors, missing data is a data error") {
  TempDir dir("cli_err");
  prepare(dir);
  const std::string manifest = quote((dir / "data" / "manifest.jsonl").string());
  write(dir / "bad.cfg", "epochs = many\n");
  CHECK(run_cli("train --manifest " + manifest + " --config " +
                quote((dir / "bad.cfg").string()) + " --out " +
                quote((dir / "m.ckpt").string())) == 1);
  CHECK(run_cli("train --manifest " + quote((dir / "none.jsonl").string()) +
                " --config " + quote((dir / "train.cfg").string()) + " --out " +
                quote((dir / "m.ckpt").string())) == 2);
  CHECK(run_cli("eval --manifest " + manifest + " --model " +
                quote((dir / "none.ckpt").string()) + " --report " +
                quote((dir / "r.json").string())) == 2);
  CHECK(run_cli("gen-data --spec " + quote((dir / "none.spec").string()) +
                " --out " + quote((dir / "x").string())) == 2);
  write(dir / "broken.jsonl", "{\"id\": 1}\n");
  CHECK(run_cli("train --manifest " + quote((dir / "broken.jsonl").string()) +
                " --config " + quote((dir / "train.cfg").string()) + " --out " +
                quote((dir / "m.ckpt").string())) == 2);
}

TEST_CASE("numerical breakdown exits with 3") {
  TempDir dir("cli_num");
  prepare(dir);
  write(dir / "wild.cfg",
        "input_size = 8\nepochs = 2\nlearning_rate = 1e300\nval_fraction = 0\n"
        "subsample_k = 4\nregions_per_positive = 8\n");
  CHECK(run_cli("train --manifest " + quote((dir / "data" / "manifest.jsonl").string()) +
                " --config " + quote((dir / "wild.cfg").string()) + " --out " +
                quote((dir / "m.ckpt").string())) == 3);
}

TEST_CASE("full workflow through every subcommand") {
  TempDir dir("cli_flow");
  prepare(dir);
  const std::string manifest = quote((dir / "data" / "manifest.jsonl").string());
  const std::string model = quote((dir / "m.ckpt").string());
  CHECK(slurp(dir / "data" / "manifest.jsonl").find("\"pos_00000\"") != std::string::npos);

  REQUIRE(run_cli("train --manifest " + manifest + " --config " +
                  quote((dir / "train.cfg").string()) + " --out " + model +
                  " --mode unweighted_mil") == 0);
  CHECK(std::filesystem::exists(dir / "m.ckpt"));
  const std::string log = slurp(dir / "m.ckpt.log.csv");
  CHECK(log.rfind("epoch,mean_loss,val_detection_rate,wall_seconds\n", 0) == 0);

  REQUIRE(run_cli("eval --manifest " + manifest + " --model " + model +
                  " --report " + quote((dir / "report.json").string()) +
                  " --fpr-targets 0.1,0.5") == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report.at("n_images") == 8);
  CHECK(report.at("grayscale") == false);
  CHECK(report.contains("detection_rate_pos"));
  CHECK(report.contains("detection_rate_neg"));
  CHECK(report.contains("detection_rate_all"));
  CHECK(report.at("tpr_at_fpr").size() == 2);

  REQUIRE(run_cli("eval --gray --manifest " + manifest + " --model " + model +
                  " --report " + quote((dir / "gray.json").string())) == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "gray.json")).at("grayscale") == true);

  REQUIRE(run_cli("predict --image " +
                      quote((dir / "data" / "images" / "pos_00000.png").string()) +
                      " --model " + model + " --no-early-exit",
                  (dir / "predict.json").string()) == 0);
  const auto verdict = nlohmann::json::parse(slurp(dir / "predict.json"));
  CHECK((verdict.at("label") == "pos" || verdict.at("label") == "neg"));
  CHECK(verdict.at("regions_evaluated") == 11);
  const double score = verdict.at("score");
  CHECK(score >= 0.0);
  CHECK(score <= 1.0);
  CHECK(verdict.at("triggering_region").is_null() == (verdict.at("label") == "neg"));

  REQUIRE(run_cli("roc-dump --manifest " + manifest + " --model " + model +
                  " --out " + quote((dir / "roc.csv").string())) == 0);
  const std::string roc = slurp(dir / "roc.csv");
  CHECK(roc.rfind("fpr,tpr,threshold\n0,0,inf\n", 0) == 0);

  REQUIRE(run_cli("crossval --manifest " + manifest + " --config " +
                  quote((dir / "train.cfg").string()) + " --k 2 --report " +
                  quote((dir / "cv.json").string())) == 0);
  const auto cv = nlohmann::json::parse(slurp(dir / "cv.json"));
  CHECK(cv.at("k") == 2);
  CHECK(cv.at("folds").size() == 2);
}

TEST_CASE("resuming from a checkpoint continues training") {
  TempDir dir("cli_resume");
  prepare(dir);
  const std::string manifest = quote((dir / "data" / "manifest.jsonl").string());
  write(dir / "two.cfg",
        "input_size = 8\nepochs = 2\nbatch_bags = 2\nsubsample_k = 4\n"
        "regions_per_positive = 8\nval_fraction = 0\nseed = 3\n");
  REQUIRE(run_cli("train --manifest " + manifest + " --config " +
                  quote((dir / "train.cfg").string()) + " --out " +
                  quote((dir / "one.ckpt").string())) == 0);
  REQUIRE(run_cli("train --manifest " + manifest + " --config " +
                  quote((dir / "two.cfg").string()) + " --out " +
                  quote((dir / "resumed.ckpt").string()) + " --resume " +
                  quote((dir / "one.ckpt").string())) == 0);
  REQUIRE(run_cli("train --manifest " + manifest + " --config " +
                  quote((dir / "two.cfg").string()) + " --out " +
                  quote((dir / "straight.ckpt").string())) == 0);
  CHECK(slurp(dir / "resumed.ckpt") == slurp(dir / "straight.ckpt"));
}

}  // TEST_SUITE
