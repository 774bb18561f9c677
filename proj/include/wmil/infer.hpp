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

#ifndef WMIL_INFER_HPP_
#define WMIL_INFER_HPP_

#include <optional>
#include <span>
#include <vector>

#include "wmil/baggen.hpp"
#include "wmil/geometry.hpp"
#include "wmil/imaging.hpp"
#include "wmil/model.hpp"

namespace wmil {

inline constexpr int kTestRegionCount = 11;

// Full frame, then five (2/3)-scale windows, then five (1/2)-scale windows.
// Within a scale the order is top-left, top-right, bottom-left,
// bottom-right, center. Window sides are floor(2w/3) etc., at least 1 pixel.
std::vector<BBox> test_regions(int img_w, int img_h);

struct Verdict {
  Label label = Label::kNegative;
  double score = 0.0;  // max p+ over the evaluated regions
  std::optional<BBox> triggering_region;
  int regions_evaluated = 0;
};

// Scores test_regions() in order. With early_exit the scan stops at the first
// region whose p+ reaches `threshold`; otherwise all 11 are scored and the
// first region reaching the threshold is reported as the trigger. Both modes
// yield the same label. Requires 0 < threshold < 1.
Verdict classify(const ModelParams& params, const Image& img, double threshold,
                 bool early_exit = true);

// Exhaustive verdicts for many images, evaluated in parallel. Output order
// matches input order and does not depend on the thread count.
std::vector<Verdict> classify_all(const ModelParams& params,
                                  std::span<const Image> images,
                                  double threshold, bool grayscale = false);

}  // namespace wmil

#endif  // WMIL_INFER_HPP_
