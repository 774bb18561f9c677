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

#include "wmil/infer.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace wmil {
namespace {

void add_scale(std::vector<BBox>& out, double W, double H, double w, double h) {
  out.push_back(BBox{0, 0, w, h});
  out.push_back(BBox{W - w, 0, w, h});
  out.push_back(BBox{0, H - h, w, h});
  out.push_back(BBox{W - w, H - h, w, h});
  out.push_back(BBox{0.5 * (W - w), 0.5 * (H - h), w, h});
}

double region_probability(const ModelParams& params, const Image& img,
                          const BBox& region) {
  thread_local ActivationCache cache;
  const int s = params.arch.input_size;
  return forward(params, crop_resize(img, region, s, s), cache).p_pos;
}

}  // namespace

std::vector<BBox> test_regions(int img_w, int img_h) {
  if (img_w < 1 || img_h < 1) {
    throw std::invalid_argument("test_regions: image size must be >= 1");
  }
  const double W = img_w;
  const double H = img_h;
  std::vector<BBox> out;
  out.reserve(kTestRegionCount);
  out.push_back(BBox{0, 0, W, H});
  add_scale(out, W, H, std::max(1, 2 * img_w / 3), std::max(1, 2 * img_h / 3));
  add_scale(out, W, H, std::max(1, img_w / 2), std::max(1, img_h / 2));
  return out;
}

Verdict classify(const ModelParams& params, const Image& img, double threshold,
                 bool early_exit) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("classify: threshold must be in (0, 1)");
  }
  const std::vector<BBox> regions = test_regions(img.width(), img.height());
  Verdict v;
  if (early_exit) {
    for (const BBox& r : regions) {
      const double p = region_probability(params, img, r);
      ++v.regions_evaluated;
      v.score = std::max(v.score, p);
      if (p >= threshold) {
        v.label = Label::kPositive;
        v.triggering_region = r;
        break;
      }
    }
    return v;
  }

  std::array<double, kTestRegionCount> probs{};
#pragma omp parallel for schedule(static)
  for (int i = 0; i < kTestRegionCount; ++i) {
    probs[i] = region_probability(params, img, regions[i]);
  }
  v.regions_evaluated = kTestRegionCount;
  for (int i = 0; i < kTestRegionCount; ++i) {
    v.score = std::max(v.score, probs[i]);
    if (!v.triggering_region && probs[i] >= threshold) {
      v.label = Label::kPositive;
      v.triggering_region = regions[i];
    }
  }
  return v;
}

std::vector<Verdict> classify_all(const ModelParams& params,
                                  std::span<const Image> images,
                                  double threshold, bool grayscale) {
  std::vector<Verdict> out(images.size());
  const auto n = static_cast<long>(images.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    out[i] = grayscale ? classify(params, to_grayscale(images[i]), threshold, false)
                       : classify(params, images[i], threshold, false);
  }
  return out;
}

}  // namespace wmil
