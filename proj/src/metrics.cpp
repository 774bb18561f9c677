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

#include "wmil/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "wmil/random.hpp"

namespace wmil {
namespace {

void check_aligned(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("metrics: inputs are not aligned");
  if (a == 0) throw std::invalid_argument("metrics: empty input");
}

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

DetectionRates detection_rates(std::span<const Label> truth,
                               std::span<const Label> predicted) {
  check_aligned(truth.size(), predicted.size());
  int p = 0, n = 0, tp = 0, tn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == Label::kPositive) {
      ++p;
      tp += predicted[i] == Label::kPositive;
    } else {
      ++n;
      tn += predicted[i] == Label::kNegative;
    }
  }
  DetectionRates r;
  if (p > 0) r.pos = static_cast<double>(tp) / p;
  if (n > 0) r.neg = static_cast<double>(tn) / n;
  if (p > 0 && n > 0) r.all = static_cast<double>(tp + tn) / (p + n);
  return r;
}

double accuracy(std::span<const Label> truth, std::span<const Label> predicted) {
  check_aligned(truth.size(), predicted.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

RocResult roc(std::span<const ScoredLabel> scored,
              std::span<const double> fpr_targets) {
  if (scored.empty()) throw std::invalid_argument("roc: empty input");
  std::size_t P = 0, N = 0;
  for (const auto& s : scored) {
    if (!std::isfinite(s.score)) throw std::invalid_argument("roc: non-finite score");
    (s.label == Label::kPositive ? P : N) += 1;
  }
  if (P == 0 || N == 0) {
    throw std::invalid_argument("roc: both classes must be present");
  }

  std::vector<ScoredLabel> sorted(scored.begin(), scored.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredLabel& a, const ScoredLabel& b) {
                     return a.score > b.score;
                   });
  RocResult r;
  r.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double t = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == t; ++i) {
      (sorted[i].label == Label::kPositive ? tp : fp) += 1;
    }
    r.points.push_back({static_cast<double>(fp) / static_cast<double>(N),
                        static_cast<double>(tp) / static_cast<double>(P), t});
  }
  for (std::size_t i = 1; i < r.points.size(); ++i) {
    const auto& a = r.points[i - 1];
    const auto& b = r.points[i];
    r.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  r.auc = std::clamp(r.auc, 0.0, 1.0);
  for (double target : fpr_targets) {
    double best = 0.0;
    for (const auto& pt : r.points) {
      if (pt.fpr <= target) best = std::max(best, pt.tpr);
    }
    r.tpr_at_fpr.emplace_back(target, best);
  }
  return r;
}

double mean_average_precision(std::span<const ScoredLabel> scored) {
  std::vector<ScoredLabel> sorted(scored.begin(), scored.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredLabel& a, const ScoredLabel& b) {
                     return a.score > b.score;
                   });
  double sum = 0.0;
  int hits = 0;
  for (std::size_t rank = 0; rank < sorted.size(); ++rank) {
    if (sorted[rank].label == Label::kPositive) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  if (hits == 0) {
    throw std::invalid_argument("mean_average_precision: no positives");
  }
  return sum / hits;
}

std::vector<Fold> kfold_split(std::span<const Label> labels, int k,
                              std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold_split: k must be >= 2");
  std::vector<int> pos, neg;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    (labels[i] == Label::kPositive ? pos : neg).push_back(i);
  }
  for (const auto* cls : {&pos, &neg}) {
    if (!cls->empty() && static_cast<int>(cls->size()) < k) {
      throw std::invalid_argument("kfold_split: k exceeds a class size");
    }
  }
  if (labels.empty()) throw std::invalid_argument("kfold_split: no items");

  Rng rng(derive_seed(seed, 0x4b464f4c44ULL));
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<int> fold_of(labels.size());
  for (std::size_t j = 0; j < pos.size(); ++j) fold_of[pos[j]] = static_cast<int>(j % k);
  // Negatives continue the round robin where positives stopped, so fold
  // sizes differ by at most one overall as well as per class.
  for (std::size_t j = 0; j < neg.size(); ++j) {
    fold_of[neg[j]] = static_cast<int>((pos.size() + j) % k);
  }

  std::vector<Fold> folds(k);
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    for (int f = 0; f < k; ++f) {
      (fold_of[i] == f ? folds[f].validation : folds[f].train).push_back(i);
    }
  }
  return folds;
}

MetricsReport make_report(std::span<const Label> truth,
                          std::span<const Label> predicted,
                          std::span<const double> scores,
                          std::span<const double> fpr_targets, double threshold,
                          bool grayscale) {
  check_aligned(truth.size(), predicted.size());
  check_aligned(truth.size(), scores.size());
  MetricsReport rep;
  rep.rates = detection_rates(truth, predicted);
  rep.threshold = threshold;
  rep.grayscale = grayscale;
  rep.n_images = static_cast<int>(truth.size());

  std::vector<ScoredLabel> scored(truth.size());
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    scored[i] = {truth[i], scores[i]};
    (truth[i] == Label::kPositive ? has_pos : has_neg) = true;
  }
  if (has_pos && has_neg) {
    const RocResult r = roc(scored, fpr_targets);
    for (const auto& pt : r.points) rep.roc_points.emplace_back(pt.fpr, pt.tpr);
    rep.auc = r.auc;
    rep.tpr_at_fpr = r.tpr_at_fpr;
  }
  if (has_pos) rep.map_score = mean_average_precision(scored);
  return rep;
}

nlohmann::ordered_json to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["detection_rate_pos"] = optional_number(report.rates.pos);
  j["detection_rate_neg"] = optional_number(report.rates.neg);
  j["detection_rate_all"] = optional_number(report.rates.all);
  j["roc_points"] = nlohmann::ordered_json::array();
  for (const auto& [fpr, tpr] : report.roc_points) {
    j["roc_points"].push_back({fpr, tpr});
  }
  j["auc"] = report.roc_points.empty() ? nlohmann::ordered_json(nullptr)
                                       : nlohmann::ordered_json(report.auc);
  j["tpr_at_fpr"] = nlohmann::ordered_json::object();
  for (const auto& [fpr, tpr] : report.tpr_at_fpr) {
    char key[32];
    std::snprintf(key, sizeof(key), "%g", fpr);
    j["tpr_at_fpr"][key] = tpr;
  }
  j["map_score"] = optional_number(report.map_score);
  j["threshold"] = report.threshold;
  j["grayscale"] = report.grayscale;
  j["n_images"] = report.n_images;
  return j;
}

}  // namespace wmil
