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

#include "wmil/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "wmil/errors.hpp"

namespace wmil {
namespace {

void check_shape(int width, int height, int channels) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3)) {
    throw std::invalid_argument("image: invalid shape " +
                                std::to_string(width) + "x" +
                                std::to_string(height) + "x" +
                                std::to_string(channels));
  }
}

std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(
      std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

Image from_bytes(int width, int height, int channels,
                 const std::uint8_t* data) {
  Image img(width, height, 3);
  auto& px = img.pixels();
  const std::size_t n = static_cast<std::size_t>(width) * height;
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      const int src = channels == 1 ? 0 : c;
      px[i * 3 + c] = static_cast<float>(data[i * channels + src]) / 255.0f;
    }
  }
  return img;
}

Image load_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw DataError("cannot read PNG " + path.string() + ": " +
                    image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw DataError("cannot decode PNG " + path.string() + ": " +
                    image.message);
  }
  return from_bytes(static_cast<int>(image.width),
                    static_cast<int>(image.height), 3, buffer.data());
}

// Reads one whitespace/comment-delimited header token of a netpbm file.
std::string pnm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

Image load_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  const std::string magic = pnm_token(in);
  const int channels = magic == "P6" ? 3 : (magic == "P5" ? 1 : 0);
  if (channels == 0) throw DataError("unsupported netpbm type in " + path.string());
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(pnm_token(in));
    height = std::stoi(pnm_token(in));
    maxval = std::stoi(pnm_token(in));
  } catch (const std::exception&) {
    throw DataError("malformed netpbm header in " + path.string());
  }
  if (width <= 0 || height <= 0 || maxval != 255) {
    throw DataError("unsupported netpbm geometry/maxval in " + path.string());
  }
  std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height *
                                 channels);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size())) {
    throw DataError("truncated netpbm data in " + path.string());
  }
  return from_bytes(width, height, channels, data.data());
}

}  // namespace

Image::Image(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image::Image(int width, int height, int channels, std::vector<float> pixels)
    : width_(width),
      height_(height),
      channels_(channels),
      pixels_(std::move(pixels)) {
  check_shape(width, height, channels);
  if (pixels_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw std::invalid_argument("image: pixel buffer size mismatch");
  }
}

Image crop_resize(const Image& img, const BBox& region, int out_w, int out_h) {
  require_valid(region);
  if (out_w <= 0 || out_h <= 0) {
    throw std::invalid_argument("crop_resize: output size must be positive");
  }
  // A hair of slack absorbs rounding in callers that compute regions from
  // fractions of the frame.
  constexpr double kSlack = 1e-9;
  if (region.x < -kSlack || region.y < -kSlack ||
      region.right() > img.width() + kSlack ||
      region.bottom() > img.height() + kSlack) {
    throw std::invalid_argument("crop_resize: region outside image");
  }

  const int channels = img.channels();
  Image out(out_w, out_h, channels);
  const double sx = region.w / out_w;
  const double sy = region.h / out_h;
  const int max_x = img.width() - 1;
  const int max_y = img.height() - 1;

  // Column taps are shared by every output row.
  std::vector<int> x0(out_w), x1(out_w);
  std::vector<float> fx(out_w);
  for (int ox = 0; ox < out_w; ++ox) {
    const double src = std::clamp(region.x + (ox + 0.5) * sx - 0.5, 0.0,
                                  static_cast<double>(max_x));
    x0[ox] = static_cast<int>(src);
    x1[ox] = std::min(x0[ox] + 1, max_x);
    fx[ox] = static_cast<float>(src - x0[ox]);
  }

  for (int oy = 0; oy < out_h; ++oy) {
    const double src = std::clamp(region.y + (oy + 0.5) * sy - 0.5, 0.0,
                                  static_cast<double>(max_y));
    const int y0 = static_cast<int>(src);
    const int y1 = std::min(y0 + 1, max_y);
    const float fy = static_cast<float>(src - y0);
    for (int ox = 0; ox < out_w; ++ox) {
      for (int c = 0; c < channels; ++c) {
        const float top = img.at(x0[ox], y0, c) +
                          fx[ox] * (img.at(x1[ox], y0, c) - img.at(x0[ox], y0, c));
        const float bottom = img.at(x0[ox], y1, c) +
                             fx[ox] * (img.at(x1[ox], y1, c) - img.at(x0[ox], y1, c));
        out.at(ox, oy, c) = std::clamp(top + fy * (bottom - top), 0.0f, 1.0f);
      }
    }
  }
  return out;
}

Image to_grayscale(const Image& img) {
  if (img.channels() != 3) {
    throw std::invalid_argument("to_grayscale: expected an RGB image");
  }
  Image out(img.width(), img.height(), 3);
  const auto& src = img.pixels();
  auto& dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const float r = src[i], g = src[i + 1], b = src[i + 2];
    const float y = (r == g && g == b)
                        ? r
                        : std::clamp(0.299f * r + 0.587f * g + 0.114f * b,
                                     0.0f, 1.0f);
    dst[i] = dst[i + 1] = dst[i + 2] = y;
  }
  return out;
}

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image " + path.string());
  unsigned char magic[8] = {};
  in.read(reinterpret_cast<char*>(magic), sizeof(magic));
  if (in.gcount() >= 2 && magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) {
    return load_pnm(path);
  }
  if (in.gcount() == 8 && png_sig_cmp(magic, 0, 8) == 0) {
    return load_png(path);
  }
  throw DataError("unrecognized image format: " + path.string());
}

void save_image(const Image& img, const std::filesystem::path& path) {
  if (img.empty()) throw std::invalid_argument("save_image: empty image");
  std::vector<std::uint8_t> bytes(img.pixels().size());
  std::transform(img.pixels().begin(), img.pixels().end(), bytes.begin(),
                 quantize);

  if (path.extension() == ".ppm" || path.extension() == ".pgm") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << (img.channels() == 3 ? "P6" : "P5") << '\n'
        << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path.string());
    return;
  }

  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0,
                               nullptr)) {
    throw DataError("cannot write PNG " + path.string() + ": " +
                    image.message);
  }
}

}  // namespace wmil
