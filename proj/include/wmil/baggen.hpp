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

#ifndef WMIL_BAGGEN_HPP_
#define WMIL_BAGGEN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wmil/geometry.hpp"
#include "wmil/imaging.hpp"

namespace wmil {

enum class Label { kNegative = 0, kPositive = 1 };

struct BagSpec {
  // Window side = factor x the annotation extent, factor drawn uniformly.
  std::vector<double> scale_factors{2.0, 2.5, 3.0};
  int regions_per_positive = 100;
  // Window-center jitter as a fraction of the window size per axis; 0.5
  // allows displacements up to half a window in either direction.
  double max_displacement = 0.5;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// One image's instances. weights[i] > 0 marks the positive sub-bag;
// degrees[i] keeps the raw (unnormalized) degree of interest.
struct Bag {
  std::string image_id;
  Label label = Label::kNegative;
  std::vector<BBox> regions;
  std::vector<double> weights;
  std::vector<double> degrees;
  int n_pos = 0;
  int n_neg = 0;

  int size() const { return static_cast<int>(regions.size()); }
};

// Windows around each annotation. Region j is placed around annotation
// j mod m; the first window of every annotation is centered on it, so each
// positive bag contains at least one region with degree 1. Annotations are
// cropped to the frame first; windows that would exceed the frame become the
// full frame.
Bag generate_positive_bag(const Image& img, std::span<const BBox> annotations,
                          const BagSpec& spec);
Bag generate_positive_bag(int img_w, int img_h,
                          std::span<const BBox> annotations,
                          const BagSpec& spec);

// The 11-region test layout with all-zero weights.
Bag generate_negative_bag(const Image& img);
Bag generate_negative_bag(int img_w, int img_h);

// Stratified subsample of k regions. Each non-empty sub-bag keeps at least
// one region; the rest is split in proportion to the sub-bag sizes. Positive
// weights are renormalized. Selected regions keep their original order.
// Returns the bag unchanged when k >= size(). Requires k >= 2.
Bag subsample_bag(const Bag& bag, int k, std::uint64_t rng_seed);

// Throws std::logic_error describing the first violated Bag invariant.
void validate_bag(const Bag& bag, double img_w, double img_h);

}  // namespace wmil

#endif  // WMIL_BAGGEN_HPP_
