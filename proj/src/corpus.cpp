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

#include "wmil/corpus.hpp"

#include <string>

#include "wmil/errors.hpp"

namespace wmil {

Corpus Corpus::load(const std::filesystem::path& manifest_path) {
  Corpus c;
  c.entries = read_manifest(manifest_path);
  const auto base = manifest_path.parent_path();
  const auto n = static_cast<long>(c.entries.size());
  c.images.resize(c.entries.size());
  std::vector<std::string> failures(c.entries.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    std::filesystem::path p = c.entries[i].path;
    if (p.is_relative()) p = base / p;
    try {
      c.images[i] = load_image(p);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw DataError(f);
  }
  return c;
}

Corpus Corpus::from_samples(std::vector<Sample> samples) {
  Corpus c;
  c.entries.reserve(samples.size());
  c.images.reserve(samples.size());
  for (Sample& s : samples) {
    c.entries.push_back(std::move(s.entry));
    c.images.push_back(std::move(s.image));
  }
  return c;
}

Corpus Corpus::subset(std::span<const int> indices) const {
  Corpus c;
  for (int i : indices) {
    c.entries.push_back(entries.at(i));
    c.images.push_back(images.at(i));
  }
  return c;
}

}  // namespace wmil
