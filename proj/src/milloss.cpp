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

#include "wmil/milloss.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "wmil/errors.hpp"

namespace wmil {
namespace {

constexpr double kWeightSumTolerance = 1e-9;
// Below this a sub-bag probability is handled in the log domain.
constexpr double kTinyProbability = 1e-250;

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double log_sigmoid(double h) { return -softplus(-h); }

// log sum_i exp(terms_i)
double log_sum_exp(const std::vector<double>& terms) {
  const double m = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

void validate(std::span<const InstanceOutput> instances,
              std::span<const double> weights) {
  if (instances.empty()) throw std::invalid_argument("bag_loss: empty bag");
  if (instances.size() != weights.size()) {
    throw std::invalid_argument("bag_loss: weights not aligned with instances");
  }
  double total = 0.0;
  bool any_pos = false;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("bag_loss: weights must be finite and >= 0");
    }
    if (w > 0) {
      any_pos = true;
      total += w;
    }
  }
  if (any_pos && std::abs(total - 1.0) > kWeightSumTolerance) {
    throw std::invalid_argument("bag_loss: positive weights sum to " +
                                std::to_string(total) + ", expected 1");
  }
  for (const auto& inst : instances) {
    if (!std::isfinite(inst.h)) {
      throw NumericalError("bag_loss: non-finite logit");
    }
  }
}

// Quad-precision loss terms for the finite-difference oracle, evaluated
// straight from the definitions.
struct QuadTerms {
  __float128 pos = 0;
  __float128 neg = 0;
};

QuadTerms quad_terms(std::span<const __float128> h,
                     std::span<const double> weights) {
  __float128 p_pos = 0;
  __float128 p_neg = 0;
  int n_pos = 0;
  int n_neg = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const __float128 e = expq(h[i]);
    if (weights[i] > 0) {
      p_pos += static_cast<__float128>(weights[i]) * (e / (e + 1));
      ++n_pos;
    } else {
      p_neg += 1 / (e + 1);
      ++n_neg;
    }
  }
  QuadTerms t;
  if (n_pos > 0) t.pos = -logq(p_pos);
  if (n_neg > 0) t.neg = -logq(p_neg / n_neg);
  return t;
}

}  // namespace

BagLossResult bag_loss(std::span<const InstanceOutput> instances,
                       std::span<const double> weights) {
  validate(instances, weights);
  const std::size_t n = instances.size();

  BagLossResult r;
  r.instances.assign(instances.begin(), instances.end());
  double p_pos = 0.0;
  double p_neg_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] > 0) {
      p_pos += weights[i] * instances[i].p_pos;
      ++r.n_pos;
    } else {
      p_neg_sum += instances[i].p_neg;
      ++r.n_neg;
    }
  }

  // log p+ and log p-; the log-domain branch only matters once a sub-bag
  // probability underflows, e.g. every positive logit below about -575.
  double log_p_pos = 0.0;
  double log_p_neg = 0.0;
  if (r.n_pos > 0) {
    if (p_pos > kTinyProbability) {
      log_p_pos = std::log(p_pos);
    } else {
      std::vector<double> terms;
      for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] > 0) {
          terms.push_back(std::log(weights[i]) + log_sigmoid(instances[i].h));
        }
      }
      log_p_pos = log_sum_exp(terms);
    }
    r.p_bag_pos = p_pos;
  }
  double p_neg = 0.0;
  if (r.n_neg > 0) {
    p_neg = p_neg_sum / r.n_neg;
    if (p_neg > kTinyProbability) {
      log_p_neg = std::log(p_neg);
    } else {
      std::vector<double> terms;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(weights[i] > 0)) terms.push_back(log_sigmoid(-instances[i].h));
      }
      log_p_neg = log_sum_exp(terms) - std::log(static_cast<double>(r.n_neg));
    }
    r.p_bag_neg = p_neg;
  }
  r.p_bag = (r.n_pos > 0 ? p_pos : 1.0) * (r.n_neg > 0 ? p_neg : 1.0);
  r.loss = -log_p_pos - log_p_neg;

  r.grad_h.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const InstanceOutput& inst = instances[i];
    if (weights[i] > 0) {
      r.grad_h[i] = p_pos > kTinyProbability
                        ? -weights[i] * inst.p_pos * inst.p_neg / p_pos
                        : -std::exp(std::log(weights[i]) + log_sigmoid(inst.h) +
                                    log_sigmoid(-inst.h) - log_p_pos);
    } else {
      r.grad_h[i] = p_neg > kTinyProbability
                        ? inst.p_pos * inst.p_neg / (p_neg * r.n_neg)
                        : std::exp(log_sigmoid(inst.h) + log_sigmoid(-inst.h) -
                                   log_p_neg) / r.n_neg;
    }
  }
  if (!std::isfinite(r.loss)) {
    throw NumericalError("bag_loss: non-finite loss");
  }
  return r;
}

double grad_check(std::span<const InstanceOutput> instances,
                  std::span<const double> weights, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1e-3)) {
    throw std::invalid_argument("grad_check: epsilon must be in (0, 1e-3]");
  }
  const BagLossResult analytic = bag_loss(instances, weights);

  std::vector<__float128> h(instances.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = instances[i].h;

  double worst = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const __float128 saved = h[i];
    h[i] = saved + epsilon;
    const QuadTerms up = quad_terms(h, weights);
    h[i] = saved - epsilon;
    const QuadTerms down = quad_terms(h, weights);
    h[i] = saved;
    const __float128 diff = (up.pos - down.pos) + (up.neg - down.neg);
    const double numeric = static_cast<double>(diff / (2 * static_cast<__float128>(epsilon)));
    const double a = analytic.grad_h[i];
    const double scale = std::max({std::abs(a), std::abs(numeric),
                                   std::numeric_limits<double>::min()});
    worst = std::max(worst, std::abs(a - numeric) / scale);
  }
  return worst;
}

CrossEntropyResult cross_entropy_loss(std::span<const InstanceOutput> instances,
                                      std::span<const double> targets) {
  if (instances.empty() || instances.size() != targets.size()) {
    throw std::invalid_argument("cross_entropy_loss: bad input sizes");
  }
  CrossEntropyResult r;
  const double n = static_cast<double>(instances.size());
  r.grad_h.resize(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const double h = instances[i].h;
    const double y = targets[i];
    // -y log p+ - (1 - y) log p-
    r.loss += (y * softplus(-h) + (1.0 - y) * softplus(h)) / n;
    r.grad_h[i] = (instances[i].p_pos - y) / n;
  }
  if (!std::isfinite(r.loss)) {
    throw NumericalError("cross_entropy_loss: non-finite loss");
  }
  return r;
}

}  // namespace wmil
