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

#ifndef WMIL_IMAGING_HPP_
#define WMIL_IMAGING_HPP_

#include <cstddef>
#include <filesystem>
#include <vector>

#include "wmil/geometry.hpp"

namespace wmil {

// Dense row-major H x W x C image with float samples in [0, 1].
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, float fill = 0.0f);
  Image(int width, int height, int channels, std::vector<float> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return pixels_.empty(); }

  float& at(int x, int y, int c) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int x, int y, int c) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  const std::vector<float>& pixels() const { return pixels_; }
  std::vector<float>& pixels() { return pixels_; }

  BBox frame() const {
    return BBox{0, 0, static_cast<double>(width_), static_cast<double>(height_)};
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> pixels_;
};

// Samples `region` into an out_w x out_h image with bilinear interpolation.
// Pixel centers sit at half-integer coordinates; samples falling outside the
// image read the nearest edge pixel.
Image crop_resize(const Image& img, const BBox& region, int out_w, int out_h);

// Luminance 0.299 R + 0.587 G + 0.114 B replicated into three channels.
Image to_grayscale(const Image& img);

// PNG (8-bit gray/RGB/RGBA) or binary PPM/PGM, detected from the file magic.
// Gray files load as 3-channel images.
Image load_image(const std::filesystem::path& path);

// Writes PNG unless the extension is .ppm. Samples are quantized to 8 bits.
void save_image(const Image& img, const std::filesystem::path& path);

}  // namespace wmil

#endif  // WMIL_IMAGING_HPP_
