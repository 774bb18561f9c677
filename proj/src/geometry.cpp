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

#include "wmil/geometry.hpp"

#include <cmath>
#include <algorithm>
#include <stdexcept>
#include <string>

namespace wmil {

void require_valid(const BBox& b) {
  if (!(b.w > 0 && b.h > 0)) {
    throw std::invalid_argument("box must have positive size, got " +
                                std::to_string(b.w) + "x" +
                                std::to_string(b.h));
  }
}

double intersect_area(const BBox& a, const BBox& b) {
  require_valid(a);
  require_valid(b);
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0 || ih <= 0) return 0.0;
  return iw * ih;
}

double degree_of_interest(const BBox& region,
                          std::span<const BBox> annotations) {
  require_valid(region);
  if (annotations.empty()) {
    throw std::invalid_argument("degree_of_interest: no annotations");
  }
  double best = 0.0;
  for (const BBox& a : annotations) {
    require_valid(a);
    // Full containment is tested explicitly so that the ratio is exactly 1
    // regardless of rounding in the product.
    const double coverage =
        region.contains(a) ? 1.0 : intersect_area(region, a) / a.area();
    best = std::max(best, coverage);
  }
  return std::clamp(best, 0.0, 1.0);
}

BBox clamp_to_image(const BBox& b, double img_w, double img_h) {
  require_valid(b);
  if (!(img_w > 0 && img_h > 0)) {
    throw std::invalid_argument("clamp_to_image: image size must be positive");
  }
  if (b.w > img_w || b.h > img_h) {
    throw std::invalid_argument("clamp_to_image: box larger than image");
  }
  BBox out = b;
  out.x = std::clamp(b.x, 0.0, img_w - b.w);
  out.y = std::clamp(b.y, 0.0, img_h - b.h);
  // (img - w) + w may round one ulp past the edge.
  while (out.x > 0 && out.right() > img_w) out.x = std::nextafter(out.x, 0.0);
  while (out.y > 0 && out.bottom() > img_h) out.y = std::nextafter(out.y, 0.0);
  return out;
}

BBox crop_to_image(const BBox& b, double img_w, double img_h) {
  const double x0 = std::max(b.x, 0.0);
  const double y0 = std::max(b.y, 0.0);
  const double x1 = std::min(b.right(), img_w);
  const double y1 = std::min(b.bottom(), img_h);
  if (x1 <= x0 || y1 <= y0) return BBox{x0, y0, 0, 0};
  return BBox{x0, y0, x1 - x0, y1 - y0};
}

}  // namespace wmil
