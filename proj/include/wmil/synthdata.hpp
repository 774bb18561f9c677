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

#ifndef WMIL_SYNTHDATA_HPP_
#define WMIL_SYNTHDATA_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmil/baggen.hpp"
#include "wmil/geometry.hpp"
#include "wmil/imaging.hpp"

namespace wmil {

// Deterministic stand-in corpus. Positive images carry 1..k "key glyphs": a
// disc of a fixed hue inside a concentric ring of a contrasting hue, each
// annotated with its tight bounding box. Negative images share the background
// model and may contain a near-miss distractor (a same-hue square, or a disc
// without the ring) that is not annotated.
struct CorpusSpec {
  int n_positive = 100;
  int n_negative = 100;
  int image_size = 128;
  int glyph_size_min = 12;
  int glyph_size_max = 32;
  int glyphs_per_positive_min = 1;
  int glyphs_per_positive_max = 3;
  double distractor_rate = 0.7;
  std::uint64_t seed = 0;

  void validate() const;
};

// One manifest record: {"id", "path", "label": "pos"|"neg",
// "boxes": [[x, y, w, h], ...]} plus an optional "category".
struct ManifestEntry {
  std::string id;
  std::string path;
  Label label = Label::kNegative;
  std::vector<BBox> boxes;
  std::optional<std::string> category;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Sample {
  ManifestEntry entry;
  Image image;
};

// Index i < n_positive renders positive "pos_<i>", the rest negatives
// "neg_<i - n_positive>". Each image draws from its own seeded stream.
Sample render_sample(const CorpusSpec& spec, int index);

// Renders every sample in memory (parallel, order-stable).
std::vector<Sample> render_corpus(const CorpusSpec& spec);

// Writes <out_dir>/images/<id>.png and <out_dir>/manifest.jsonl; returns the
// manifest. Throws DataError when the directory cannot be written.
std::vector<ManifestEntry> generate_corpus(const CorpusSpec& spec,
                                           const std::filesystem::path& out_dir);

std::string manifest_line(const ManifestEntry& entry);
// Throws DataError on malformed records.
ManifestEntry parse_manifest_line(const std::string& line);

void write_manifest(std::span<const ManifestEntry> entries,
                    const std::filesystem::path& path);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace wmil

#endif  // WMIL_SYNTHDATA_HPP_
