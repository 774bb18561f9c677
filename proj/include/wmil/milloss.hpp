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

#ifndef WMIL_MILLOSS_HPP_
#define WMIL_MILLOSS_HPP_

#include <optional>
#include <span>
#include <vector>

#include "wmil/model.hpp"

namespace wmil {

// Weighted MIL bag objective.
//
// The bag is split by weight: regions with w_i > 0 form the positive
// sub-bag, regions with w_i = 0 the negative sub-bag (n+ and n- members).
//
//   p+ = sum_{w_i > 0} w_i p_i+          (weights sum to 1)
//   p- = (1 / n-) sum_{w_i = 0} p_i-
//   p  = p+ p-
//   L  = -[n+ > 0] log p+  -  [n- > 0] log p-
//
//   dL/dh_i = (-[w_i > 0] w_i / p+  +  [w_i = 0] / (p- n-)) p_i+ p_i-
//
// An image without annotations is a bag with n+ = 0, so the same expression
// covers negative images.
struct BagLossResult {
  std::vector<InstanceOutput> instances;
  std::optional<double> p_bag_pos;  // absent when n+ = 0
  std::optional<double> p_bag_neg;  // absent when n- = 0
  double p_bag = 1.0;
  double loss = 0.0;
  std::vector<double> grad_h;
  int n_pos = 0;
  int n_neg = 0;
};

// Throws std::invalid_argument on an empty bag, misaligned or negative
// weights, or positive weights whose sum is off 1 by more than 1e-9;
// NumericalError on a non-finite logit.
BagLossResult bag_loss(std::span<const InstanceOutput> instances,
                       std::span<const double> weights);

// Central-difference check of bag_loss().grad_h. Each h_i is perturbed by
// +/- epsilon and L is re-evaluated from scratch in quad precision, one
// sub-bag term at a time; the result is the largest per-instance relative
// error |analytic - numeric| / max(|analytic|, |numeric|).
// Requires 0 < epsilon <= 1e-3.
double grad_check(std::span<const InstanceOutput> instances,
                  std::span<const double> weights, double epsilon);

// Mean per-region sigmoid cross-entropy against 0/1 targets, used by the
// region-supervised baseline. grad_h[i] = (p_i+ - target_i) / n.
struct CrossEntropyResult {
  double loss = 0.0;
  std::vector<double> grad_h;
};
CrossEntropyResult cross_entropy_loss(std::span<const InstanceOutput> instances,
                                      std::span<const double> targets);

}  // namespace wmil

#endif  // WMIL_MILLOSS_HPP_
