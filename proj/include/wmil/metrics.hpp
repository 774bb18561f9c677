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

#ifndef WMIL_METRICS_HPP_
#define WMIL_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wmil/baggen.hpp"

namespace wmil {

// Fraction of each class classified correctly. A rate is nullopt when its
// denominator class is empty; `all` additionally needs both classes.
struct DetectionRates {
  std::optional<double> pos;
  std::optional<double> neg;
  std::optional<double> all;
};

DetectionRates detection_rates(std::span<const Label> truth,
                               std::span<const Label> predicted);

// Plain fraction of matching labels.
double accuracy(std::span<const Label> truth, std::span<const Label> predicted);

struct ScoredLabel {
  Label label = Label::kNegative;
  double score = 0.0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // +inf for the (0, 0) origin
};

struct RocResult {
  std::vector<RocPoint> points;
  double auc = 0.0;
  // (target FPR, TPR) in the order the targets were given.
  std::vector<std::pair<double, double>> tpr_at_fpr;
};

// Threshold sweep over the distinct scores in descending order, ties grouped
// into one step. AUC by the trapezoid rule. TPR at a target FPR is read off
// the step function: the highest TPR among points with FPR <= target.
// Throws std::invalid_argument unless both classes are present and all
// scores are finite.
RocResult roc(std::span<const ScoredLabel> scored,
              std::span<const double> fpr_targets);

// Average precision of the descending-score ranking; ties keep input order.
// Throws std::invalid_argument without positives.
double mean_average_precision(std::span<const ScoredLabel> scored);

struct Fold {
  std::vector<int> train;
  std::vector<int> validation;
};

// Stratified k folds: each class is shuffled with the seed and dealt
// round-robin. Throws std::invalid_argument if k < 2 or k exceeds the size of
// a present class.
std::vector<Fold> kfold_split(std::span<const Label> labels, int k,
                              std::uint64_t seed);

struct MetricsReport {
  DetectionRates rates;
  std::vector<std::pair<double, double>> roc_points;  // (fpr, tpr)
  double auc = 0.0;
  std::vector<std::pair<double, double>> tpr_at_fpr;
  std::optional<double> map_score;
  // Context, not metrics.
  double threshold = 0.5;
  bool grayscale = false;
  int n_images = 0;
};

MetricsReport make_report(std::span<const Label> truth,
                          std::span<const Label> predicted,
                          std::span<const double> scores,
                          std::span<const double> fpr_targets, double threshold,
                          bool grayscale);

nlohmann::ordered_json to_json(const MetricsReport& report);

}  // namespace wmil

#endif  // WMIL_METRICS_HPP_
