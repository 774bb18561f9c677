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


#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "test_util.hpp"
#include "wmil/errors.hpp"
#include "wmil/imaging.hpp"

using wmil::BBox;
using wmil::Image;

TEST_SUITE("imaging") {

TEST_CASE("full-frame crop at native size is the identity") {
  std::mt19937_64 g(1);
  const Image img = wmil::testing::random_image(g, 17, 9);
  CHECK(wmil::crop_resize(img, img.frame(), 17, 9) == img);
}

TEST_CASE("bilinear resampling preserves a constant image") {
  const Image img(40, 30, 3, 0.37f);
  for (const BBox r : {BBox{0, 0, 40, 30}, BBox{3.5, 2.25, 11.1, 7.9},
                       BBox{39, 29, 1, 1}}) {
    const Image out = wmil::crop_resize(img, r, 13, 5);
    for (float v : out.pixels()) CHECK(v == 0.37f);
  }
}

TEST_CASE("2x2 checkerboard shrinks to mid grey") {
  Image img(2, 2, 1);
  img.at(0, 0, 0) = 1.0f;
  img.at(1, 1, 0) = 1.0f;
  const Image out = wmil::crop_resize(img, img.frame(), 1, 1);
  CHECK(out.at(0, 0, 0) == 0.5f);
}

TEST_CASE("upsampling a two-pixel ramp interpolates between centers") {
  Image img(2, 1, 1);
  img.at(1, 0, 0) = 1.0f;
  // Output centers at 0.25 and 0.75 of the 2-pixel row, i.e. source
  // coordinates -0.25 (clamped to 0), 0.25, 0.75, 1.25 (clamped to 1).
  const Image out = wmil::crop_resize(img, img.frame(), 4, 1);
  CHECK(out.at(0, 0, 0) == 0.0f);
  CHECK(out.at(1, 0, 0) == doctest::Approx(0.25));
  CHECK(out.at(2, 0, 0) == doctest::Approx(0.75));
  CHECK(out.at(3, 0, 0) == 1.0f);
}

TEST_CASE("crop_resize rejects regions outside the image and empty outputs") {
  const Image img(10, 10, 3);
  CHECK_THROWS_AS(wmil::crop_resize(img, {-1, 0, 5, 5}, 4, 4), std::invalid_argument);
  CHECK_THROWS_AS(wmil::crop_resize(img, {6, 6, 5, 5}, 4, 4), std::invalid_argument);
  CHECK_THROWS_AS(wmil::crop_resize(img, {0, 0, 5, 5}, 0, 4), std::invalid_argument);
}

TEST_CASE("property: resampled values stay in [0,1]") {
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const Image img = wmil::testing::random_image(g, 23, 31);
    const double w = 0.5 + u(g) * 22, h = 0.5 + u(g) * 30;
    const BBox r{u(g) * (23 - w), u(g) * (31 - h), w, h};
    const Image out = wmil::crop_resize(img, r, 1 + static_cast<int>(g() % 40),
                                        1 + static_cast<int>(g() % 40));
    for (float v : out.pixels()) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
  }
}

TEST_CASE("grayscale luminance of primaries and greys") {
  Image red(1, 1, 3), blue(1, 1, 3), grey(1, 1, 3, 0.42f);
  red.at(0, 0, 0) = 1.0f;
  blue.at(0, 0, 2) = 1.0f;
  for (int c = 0; c < 3; ++c) {
    CHECK(wmil::to_grayscale(red).at(0, 0, c) == doctest::Approx(0.299).epsilon(1e-6));
    CHECK(wmil::to_grayscale(blue).at(0, 0, c) == doctest::Approx(0.114).epsilon(1e-6));
  }
  CHECK(wmil::to_grayscale(grey) == grey);
}

TEST_CASE("grayscale requires RGB") {
  CHECK_THROWS_AS(wmil::to_grayscale(Image(2, 2, 1)), std::invalid_argument);
}

TEST_CASE("property: grayscale is idempotent and channel-equal") {
  std::mt19937_64 g(3);
  for (int t = 0; t < 50; ++t) {
    const Image img = wmil::testing::random_image(g, 8, 5);
    const Image once = wmil::to_grayscale(img);
    CHECK(wmil::to_grayscale(once) == once);
    for (std::size_t i = 0; i < once.pixels().size(); i += 3) {
      CHECK(once.pixels()[i] == once.pixels()[i + 1]);
      CHECK(once.pixels()[i] == once.pixels()[i + 2]);
    }
  }
}

TEST_CASE("save/load round trip stays within one quantization step") {
  wmil::testing::TempDir dir("imaging");
  std::mt19937_64 g(4);
  const Image img = wmil::testing::random_image(g, 19, 7);
  for (const char* name : {"a.png", "a.ppm"}) {
    wmil::save_image(img, dir / name);
    const Image back = wmil::load_image(dir / name);
    REQUIRE(back.width() == 19);
    REQUIRE(back.height() == 7);
    REQUIRE(back.channels() == 3);
    for (std::size_t i = 0; i < img.pixels().size(); ++i) {
      CHECK(std::abs(back.pixels()[i] - img.pixels()[i]) <= 1.0f / 255.0f);
    }
    // A second round trip is exact.
    wmil::save_image(back, dir / name);
    CHECK(wmil::load_image(dir / name) == back);
  }
}

TEST_CASE("grey-level files load as three equal channels") {
  wmil::testing::TempDir dir("imaging");
  Image img(3, 2, 1, 0.0f);
  img.at(2, 1, 0) = 1.0f;
  for (const char* name : {"g.png", "g.pgm"}) {
    wmil::save_image(img, dir / name);
    const Image back = wmil::load_image(dir / name);
    REQUIRE(back.channels() == 3);
    CHECK(back.at(2, 1, 0) == 1.0f);
    CHECK(back.at(2, 1, 2) == 1.0f);
    CHECK(back.at(0, 0, 1) == 0.0f);
  }
}

TEST_CASE("loading reports data errors for missing and malformed files") {
  wmil::testing::TempDir dir("imaging");
  CHECK_THROWS_AS(wmil::load_image(dir / "missing.png"), wmil::DataError);
  {
    std::ofstream(dir / "junk.png") << "not an image at all";
  }
  CHECK_THROWS_AS(wmil::load_image(dir / "junk.png"), wmil::DataError);
  {
    std::ofstream(dir / "bad.ppm") << "P6\n4 4\n255\nxx";
  }
  CHECK_THROWS_AS(wmil::load_image(dir / "bad.ppm"), wmil::DataError);
  {
    std::ofstream(dir / "hdr.ppm") << "P6\nfour 4\n255\n";
  }
  CHECK_THROWS_AS(wmil::load_image(dir / "hdr.ppm"), wmil::DataError);
}

}  // TEST_SUITE
