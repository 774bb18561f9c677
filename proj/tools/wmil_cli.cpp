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

// wmil: command-line front end.
//
//   wmil gen-data --spec <file> --out <dir>
//   wmil train    --manifest <file> --config <file> --out <checkpoint> [--mode M]
//   wmil eval     --manifest <file> --model <checkpoint> --report <file>
//                 [--threshold F] [--gray] [--fpr-targets 0.01,0.05]
//   wmil predict  --image <path> --model <checkpoint> [--no-early-exit]
//   wmil crossval --manifest <file> --config <file> --k 10
//   wmil roc-dump --manifest <file> --model <checkpoint> --out <csv>
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wmil/config.hpp"
#include "wmil/corpus.hpp"
#include "wmil/errors.hpp"
#include "wmil/infer.hpp"
#include "wmil/metrics.hpp"
#include "wmil/model.hpp"
#include "wmil/synthdata.hpp"
#include "wmil/trainer.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Scored {
  std::vector<wmil::Label> truth;
  std::vector<wmil::Label> predicted;
  std::vector<double> scores;
};

Scored score_corpus(const wmil::ModelParams& params, const wmil::Corpus& corpus,
                    double threshold, bool gray) {
  const auto verdicts = wmil::classify_all(params, corpus.images, threshold, gray);
  Scored s;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    s.truth.push_back(corpus.entries[i].label);
    s.predicted.push_back(verdicts[i].label);
    s.scores.push_back(verdicts[i].score);
  }
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw wmil::DataError("cannot write " + path);
  out << text;
  if (!out) throw wmil::DataError("write failed: " + path);
}

std::string fmt_rate(const std::optional<double>& r) {
  if (!r) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *r);
  return buf;
}

int cmd_gen_data(const std::string& spec_path, const std::string& out_dir) {
  const wmil::CorpusSpec spec =
      wmil::corpus_spec_from(wmil::read_key_values(spec_path));
  const auto entries = wmil::generate_corpus(spec, out_dir);
  std::cout << "wrote " << entries.size() << " images and "
            << out_dir << "/manifest.jsonl\n";
  return kOk;
}

int cmd_train(const std::string& manifest, const std::string& config_path,
              const std::string& out, const std::string& mode,
              const std::string& log_path, const std::string& resume_path) {
  wmil::TrainConfig config =
      wmil::train_config_from(wmil::read_key_values(config_path));
  if (!mode.empty()) config.mode = wmil::parse_train_mode(mode);
  const wmil::Corpus corpus = wmil::Corpus::load(manifest);

  std::optional<wmil::Checkpoint> resume;
  if (!resume_path.empty()) resume = wmil::load_checkpoint(resume_path);

  wmil::TrainHooks hooks;
  hooks.on_epoch = [&](const wmil::EpochRecord& r) {
    std::fprintf(stderr, "epoch %d/%d  loss %.5f  val %.4f  %.1fs\n", r.epoch,
                 config.epochs, r.mean_loss, r.val_detection_rate,
                 r.wall_seconds);
  };
  hooks.on_checkpoint = [&](const wmil::Checkpoint& c) {
    wmil::save_checkpoint(c, out);
  };
  const wmil::TrainResult result = wmil::train(corpus, config, resume, hooks);
  wmil::save_checkpoint(wmil::Checkpoint{result.params, result.state}, out);
  result.log.write_csv(log_path.empty() ? out + ".log.csv" : log_path);
  std::cout << "saved " << out << " (" << wmil::to_string(config.mode) << ", "
            << result.log.epochs.size() << " epochs)\n";
  return kOk;
}

int cmd_eval(const std::string& manifest, const std::string& model,
             double threshold, bool gray, const std::vector<double>& targets,
             const std::string& report_path) {
  const wmil::ModelParams params = wmil::load_params(model);
  const wmil::Corpus corpus = wmil::Corpus::load(manifest);
  const Scored s = score_corpus(params, corpus, threshold, gray);
  const wmil::MetricsReport rep = wmil::make_report(
      s.truth, s.predicted, s.scores, targets, threshold, gray);
  write_text(report_path, wmil::to_json(rep).dump(2) + "\n");
  std::cout << "detection rate pos " << fmt_rate(rep.rates.pos) << "  neg "
            << fmt_rate(rep.rates.neg) << "  all " << fmt_rate(rep.rates.all)
            << "\n";
  return kOk;
}

int cmd_predict(const std::string& image, const std::string& model,
                double threshold, bool no_early_exit) {
  const wmil::ModelParams params = wmil::load_params(model);
  const wmil::Image img = wmil::load_image(image);
  const wmil::Verdict v = wmil::classify(params, img, threshold, !no_early_exit);
  nlohmann::ordered_json j;
  j["label"] = v.label == wmil::Label::kPositive ? "pos" : "neg";
  j["score"] = v.score;
  if (v.triggering_region) {
    const auto& r = *v.triggering_region;
    j["triggering_region"] = {r.x, r.y, r.w, r.h};
  } else {
    j["triggering_region"] = nullptr;
  }
  j["regions_evaluated"] = v.regions_evaluated;
  std::cout << j.dump() << "\n";
  return kOk;
}

int cmd_crossval(const std::string& manifest, const std::string& config_path,
                 int k, const std::string& report_path) {
  const wmil::TrainConfig config =
      wmil::train_config_from(wmil::read_key_values(config_path));
  const wmil::Corpus corpus = wmil::Corpus::load(manifest);
  std::vector<wmil::Label> labels;
  for (const auto& e : corpus.entries) labels.push_back(e.label);
  const auto folds = wmil::kfold_split(labels, k, config.seed);

  nlohmann::ordered_json report;
  report["k"] = k;
  report["mode"] = std::string(wmil::to_string(config.mode));
  report["folds"] = nlohmann::ordered_json::array();
  double sum_pos = 0, sum_neg = 0, sum_all = 0;
  for (int f = 0; f < k; ++f) {
    const wmil::Corpus train_part = corpus.subset(folds[f].train);
    const wmil::Corpus val_part = corpus.subset(folds[f].validation);
    const auto result = wmil::train(train_part, config);
    const Scored s = score_corpus(result.params, val_part, config.threshold, false);
    const auto rates = wmil::detection_rates(s.truth, s.predicted);
    sum_pos += rates.pos.value_or(0);
    sum_neg += rates.neg.value_or(0);
    sum_all += rates.all.value_or(0);
    report["folds"].push_back({{"fold", f + 1},
                               {"detection_rate_pos", fmt_rate(rates.pos)},
                               {"detection_rate_neg", fmt_rate(rates.neg)},
                               {"detection_rate_all", fmt_rate(rates.all)}});
    std::cout << "fold " << f + 1 << "/" << k << "  pos " << fmt_rate(rates.pos)
              << "  neg " << fmt_rate(rates.neg) << "  all "
              << fmt_rate(rates.all) << std::endl;
  }
  report["mean_detection_rate_pos"] = sum_pos / k;
  report["mean_detection_rate_neg"] = sum_neg / k;
  report["mean_detection_rate_all"] = sum_all / k;
  std::cout << "mean  pos " << fmt_rate(sum_pos / k) << "  neg "
            << fmt_rate(sum_neg / k) << "  all " << fmt_rate(sum_all / k) << "\n";
  if (!report_path.empty()) write_text(report_path, report.dump(2) + "\n");
  return kOk;
}

int cmd_roc_dump(const std::string& manifest, const std::string& model,
                 const std::string& out, bool gray) {
  const wmil::ModelParams params = wmil::load_params(model);
  const wmil::Corpus corpus = wmil::Corpus::load(manifest);
  const Scored s = score_corpus(params, corpus, 0.5, gray);
  std::vector<wmil::ScoredLabel> scored;
  for (std::size_t i = 0; i < s.truth.size(); ++i) {
    scored.push_back({s.truth[i], s.scores[i]});
  }
  const auto r = wmil::roc(scored, {});
  std::string csv = "fpr,tpr,threshold\n";
  char buf[96];
  for (const auto& p : r.points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.fpr, p.tpr,
                  p.threshold);
    csv += buf;
  }
  write_text(out, csv);
  std::cout << "AUC " << r.auc << ", " << r.points.size() << " points\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted multiple-instance learning for region-based image "
               "classification"};
  app.require_subcommand(1);

  std::string spec_path, out_dir;
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic corpus");
  gen->add_option("--spec", spec_path, "Corpus spec (key=value)")->required();
  gen->add_option("--out", out_dir, "Output directory")->required();

  std::string manifest, config_path, out, mode, log_path, resume_path;
  auto* train = app.add_subcommand("train", "Train a region scorer");
  train->add_option("--manifest", manifest, "Corpus manifest (JSON lines)")->required();
  train->add_option("--config", config_path, "Training config (key=value)")->required();
  train->add_option("--out", out, "Checkpoint to write")->required();
  train->add_option("--mode", mode, "Override the training mode")
      ->check(CLI::IsMember({"weighted_mil", "unweighted_mil",
                             "region_supervised", "whole_image"}));
  train->add_option("--log", log_path, "Training log CSV (default <out>.log.csv)");
  train->add_option("--resume", resume_path, "Resume from a checkpoint");

  std::string model, report_path;
  double threshold = 0.5;
  bool gray = false;
  std::vector<double> fpr_targets{0.01, 0.05};
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a corpus");
  eval->add_option("--manifest", manifest)->required();
  eval->add_option("--model", model)->required();
  eval->add_option("--threshold", threshold)->check(CLI::Range(0.0, 1.0));
  eval->add_flag("--gray", gray, "Score grayscale copies of the images");
  eval->add_option("--fpr-targets", fpr_targets)->delimiter(',');
  eval->add_option("--report", report_path, "JSON report to write")->required();

  std::string image;
  bool no_early_exit = false;
  auto* predict = app.add_subcommand("predict", "Classify one image");
  predict->add_option("--image", image)->required();
  predict->add_option("--model", model)->required();
  predict->add_option("--threshold", threshold)->check(CLI::Range(0.0, 1.0));
  predict->add_flag("--no-early-exit", no_early_exit);

  int k = 10;
  auto* crossval = app.add_subcommand("crossval", "Stratified k-fold cross-validation");
  crossval->add_option("--manifest", manifest)->required();
  crossval->add_option("--config", config_path)->required();
  crossval->add_option("--k", k)->check(CLI::PositiveNumber);
  crossval->add_option("--report", report_path, "Optional JSON summary");

  auto* roc_dump = app.add_subcommand("roc-dump", "Write the ROC curve as CSV");
  roc_dump->add_option("--manifest", manifest)->required();
  roc_dump->add_option("--model", model)->required();
  roc_dump->add_option("--out", out)->required();
  roc_dump->add_flag("--gray", gray);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_gen_data(spec_path, out_dir);
    if (*train) return cmd_train(manifest, config_path, out, mode, log_path, resume_path);
    if (*eval) {
      return cmd_eval(manifest, model, threshold, gray, fpr_targets, report_path);
    }
    if (*predict) return cmd_predict(image, model, threshold, no_early_exit);
    if (*crossval) return cmd_crossval(manifest, config_path, k, report_path);
    if (*roc_dump) return cmd_roc_dump(manifest, model, out, gray);
  } catch (const wmil::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const wmil::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
