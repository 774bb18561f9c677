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

#ifndef WMIL_CORPUS_HPP_
#define WMIL_CORPUS_HPP_

#include <filesystem>
#include <span>
#include <vector>

#include "wmil/imaging.hpp"
#include "wmil/synthdata.hpp"

namespace wmil {

// A manifest with its images decoded into memory.
struct Corpus {
  std::vector<ManifestEntry> entries;
  std::vector<Image> images;

  std::size_t size() const { return entries.size(); }

  // Image paths are resolved relative to the manifest's directory. Throws
  // DataError for unreadable images or positives without boxes.
  static Corpus load(const std::filesystem::path& manifest_path);
  static Corpus from_samples(std::vector<Sample> samples);

  Corpus subset(std::span<const int> indices) const;
};

}  // namespace wmil

#endif  // WMIL_CORPUS_HPP_
