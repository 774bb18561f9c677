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


#ifndef WMIL_TESTS_TEST_UTIL_HPP_
#define WMIL_TESTS_TEST_UTIL_HPP_

#include <filesystem>
#include <random>
#include <string>

#include "wmil/geometry.hpp"
#include "wmil/imaging.hpp"

namespace wmil::testing {

// A scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("wmil_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline BBox random_box(std::mt19937_64& g, double extent) {
  std::uniform_real_distribution<double> pos(-0.25 * extent, extent);
  std::uniform_real_distribution<double> len(0.5, 0.6 * extent);
  return BBox{pos(g), pos(g), len(g), len(g)};
}

inline Image random_image(std::mt19937_64& g, int w, int h, int channels = 3) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Image img(w, h, channels);
  for (float& v : img.pixels()) v = u(g);
  return img;
}

}  // namespace wmil::testing

#endif  // WMIL_TESTS_TEST_UTIL_HPP_
