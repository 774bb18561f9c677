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

#include "wmil/baggen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "wmil/infer.hpp"
#include "wmil/random.hpp"

namespace wmil {
namespace {

void finalize_weights(Bag& bag) {
  double total = 0.0;
  for (double d : bag.degrees) {
    if (d > 0) total += d;
  }
  bag.weights.assign(bag.degrees.size(), 0.0);
  bag.n_pos = 0;
  bag.n_neg = 0;
  for (std::size_t i = 0; i < bag.degrees.size(); ++i) {
    if (bag.degrees[i] > 0) {
      bag.weights[i] = bag.degrees[i] / total;
      ++bag.n_pos;
    } else {
      ++bag.n_neg;
    }
  }
}

}  // namespace

void BagSpec::validate() const {
  if (scale_factors.empty()) {
    throw std::invalid_argument("BagSpec: scale_factors is empty");
  }
  for (double f : scale_factors) {
    if (!(f > 1.0)) {
      throw std::invalid_argument("BagSpec: scale factors must exceed 1");
    }
  }
  if (regions_per_positive < 1) {
    throw std::invalid_argument("BagSpec: regions_per_positive must be >= 1");
  }
  if (!(max_displacement >= 0.0)) {
    throw std::invalid_argument("BagSpec: max_displacement must be >= 0");
  }
}

Bag generate_positive_bag(const Image& img, std::span<const BBox> annotations,
                          const BagSpec& spec) {
  return generate_positive_bag(img.width(), img.height(), annotations, spec);
}

Bag generate_positive_bag(int img_w, int img_h,
                          std::span<const BBox> annotations,
                          const BagSpec& spec) {
  spec.validate();
  if (img_w <= 0 || img_h <= 0) {
    throw std::invalid_argument("generate_positive_bag: bad image size");
  }
  std::vector<BBox> boxes;
  boxes.reserve(annotations.size());
  for (const BBox& a : annotations) {
    const BBox inside = crop_to_image(a, img_w, img_h);
    if (inside.valid()) boxes.push_back(inside);
  }
  if (boxes.empty()) {
    throw std::invalid_argument(
        "generate_positive_bag: no annotation overlaps the image");
  }

  const double W = img_w;
  const double H = img_h;
  Rng rng(spec.rng_seed);
  Bag bag;
  bag.label = Label::kPositive;
  bag.regions.reserve(spec.regions_per_positive);

  for (int j = 0; j < spec.regions_per_positive; ++j) {
    const std::size_t which = static_cast<std::size_t>(j) % boxes.size();
    const BBox& a = boxes[which];
    const double factor =
        spec.scale_factors[rng.below(spec.scale_factors.size())];
    // The window has the image's aspect ratio and is sized by the annotation
    // side that is larger relative to the frame, so that a centered window
    // always contains the annotation.
    const bool width_rules = a.w * H >= a.h * W;
    const double ww = width_rules ? factor * a.w : factor * a.h * W / H;
    const double wh = width_rules ? factor * a.w * H / W : factor * a.h;
    const double du = rng.uniform(-1.0, 1.0);
    const double dv = rng.uniform(-1.0, 1.0);
    if (ww >= W || wh >= H) {
      bag.regions.push_back(BBox{0, 0, W, H});
      continue;
    }
    const bool centered = static_cast<std::size_t>(j) < boxes.size();
    const double disp = centered ? 0.0 : spec.max_displacement;
    const double cx = a.center_x() + du * disp * ww;
    const double cy = a.center_y() + dv * disp * wh;
    bag.regions.push_back(
        clamp_to_image(BBox{cx - 0.5 * ww, cy - 0.5 * wh, ww, wh}, W, H));
  }

  bag.degrees.reserve(bag.regions.size());
  for (const BBox& r : bag.regions) {
    bag.degrees.push_back(degree_of_interest(r, boxes));
  }
  finalize_weights(bag);
  return bag;
}

Bag generate_negative_bag(const Image& img) {
  return generate_negative_bag(img.width(), img.height());
}

Bag generate_negative_bag(int img_w, int img_h) {
  Bag bag;
  bag.label = Label::kNegative;
  bag.regions = test_regions(img_w, img_h);
  bag.degrees.assign(bag.regions.size(), 0.0);
  finalize_weights(bag);
  return bag;
}

Bag subsample_bag(const Bag& bag, int k, std::uint64_t rng_seed) {
  if (k < 2) throw std::invalid_argument("subsample_bag: k must be >= 2");
  if (k >= bag.size()) return bag;

  std::vector<int> pos, neg;
  for (int i = 0; i < bag.size(); ++i) {
    (bag.weights[i] > 0 ? pos : neg).push_back(i);
  }
  int k_pos = 0;
  if (pos.empty()) {
    k_pos = 0;
  } else if (neg.empty()) {
    k_pos = k;
  } else {
    k_pos = static_cast<int>(std::lround(static_cast<double>(k) * pos.size() /
                                         bag.size()));
    k_pos = std::clamp(k_pos, 1, k - 1);
    k_pos = std::min(k_pos, static_cast<int>(pos.size()));
    k_pos = std::max(k_pos, k - static_cast<int>(neg.size()));
  }
  const int k_neg = k - k_pos;

  Rng rng(rng_seed);
  auto pick = [&rng](std::vector<int>& from, int count) {
    // Partial Fisher-Yates.
    for (int i = 0; i < count; ++i) {
      const auto j = i + static_cast<int>(rng.below(from.size() - i));
      std::swap(from[i], from[j]);
    }
    from.resize(count);
  };
  pick(pos, k_pos);
  pick(neg, k_neg);
  std::vector<int> keep;
  keep.reserve(k);
  keep.insert(keep.end(), pos.begin(), pos.end());
  keep.insert(keep.end(), neg.begin(), neg.end());
  std::sort(keep.begin(), keep.end());

  Bag out;
  out.image_id = bag.image_id;
  out.label = bag.label;
  for (int i : keep) {
    out.regions.push_back(bag.regions[i]);
    out.degrees.push_back(bag.degrees[i]);
    out.weights.push_back(bag.weights[i]);
  }
  const double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
  out.n_pos = 0;
  out.n_neg = 0;
  for (double& w : out.weights) {
    if (w > 0) {
      w /= total;
      ++out.n_pos;
    } else {
      ++out.n_neg;
    }
  }
  return out;
}

void validate_bag(const Bag& bag, double img_w, double img_h) {
  auto fail = [&](const std::string& what) {
    throw std::logic_error("bag " + bag.image_id + ": " + what);
  };
  const auto n = bag.regions.size();
  if (bag.weights.size() != n || bag.degrees.size() != n) {
    fail("weights/degrees not aligned with regions");
  }
  if (bag.n_pos + bag.n_neg != static_cast<int>(n)) fail("n_pos + n_neg != n");
  int pos = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!bag.regions[i].valid()) fail("degenerate region");
    constexpr double kSlack = 1e-9;
    const BBox& r = bag.regions[i];
    if (r.x < -kSlack || r.y < -kSlack || r.right() > img_w + kSlack ||
        r.bottom() > img_h + kSlack) {
      fail("region outside image");
    }
    if (bag.weights[i] < 0) fail("negative weight");
    if (bag.weights[i] > 0) {
      ++pos;
      total += bag.weights[i];
    }
  }
  if (pos != bag.n_pos) fail("n_pos does not match the positive weights");
  if (pos > 0 && std::abs(total - 1.0) > 1e-9) fail("weights do not sum to 1");
  if (bag.label == Label::kNegative && bag.n_pos != 0) {
    fail("negative bag with positive sub-bag");
  }
}

}  // namespace wmil
