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

#ifndef WMIL_GEOMETRY_HPP_
#define WMIL_GEOMETRY_HPP_

#include <span>

namespace wmil {

// Axis-aligned box in real-valued pixel coordinates. (x, y) is the top-left
// corner; the box covers [x, x + w) x [y, y + h).
struct BBox {
  double x = 0;
  double y = 0;
  double w = 1;
  double h = 1;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }

  bool valid() const { return w > 0 && h > 0; }
  bool within(double img_w, double img_h) const {
    return x >= 0 && y >= 0 && right() <= img_w && bottom() <= img_h;
  }
  bool contains(const BBox& o) const {
    return o.x >= x && o.y >= y && o.right() <= right() &&
           o.bottom() <= bottom();
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

// Throws std::invalid_argument unless w > 0 and h > 0.
void require_valid(const BBox& b);

double intersect_area(const BBox& a, const BBox& b);

// Maximum coverage of any annotation by `region`, coverage being
// intersect_area(region, A) / area(A). The value lies in [0, 1] and reaches 1
// exactly when some annotation is fully inside the region.
// Throws std::invalid_argument on an empty annotation list.
double degree_of_interest(const BBox& region, std::span<const BBox> annotations);

// Translates `b` by the smallest offset that puts it inside
// [0, img_w] x [0, img_h]. The size is never changed, so a box larger than
// the image is rejected.
BBox clamp_to_image(const BBox& b, double img_w, double img_h);

// Intersection of `b` with the image frame, or nullopt-like zero box when
// disjoint (w == 0).
BBox crop_to_image(const BBox& b, double img_w, double img_h);

}  // namespace wmil

#endif  // WMIL_GEOMETRY_HPP_
