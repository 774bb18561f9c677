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

#include "wmil/synthdata.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include "json.hpp"

#include "wmil/errors.hpp"
#include "wmil/random.hpp"

namespace wmil {
namespace {

using Color = std::array<float, 3>;

constexpr Color kGlyphHue{0.85f, 0.15f, 0.15f};
constexpr Color kRingHue{0.15f, 0.80f, 0.85f};
constexpr double kRingInner = 0.6;  // inner ring radius / outer radius
constexpr int kNoiseGrid = 6;       // coarse lattice cells per side

Color jitter(const Color& c, Rng& rng) {
  Color out;
  for (int i = 0; i < 3; ++i) {
    out[i] = std::clamp(c[i] + static_cast<float>(rng.uniform(-0.05, 0.05)),
                        0.0f, 1.0f);
  }
  return out;
}

void set(Image& img, int x, int y, const Color& c) {
  for (int i = 0; i < 3; ++i) img.at(x, y, i) = c[i];
}

// Smooth value noise plus per-pixel grain around a per-image tint.
void paint_background(Image& img, Rng& rng) {
  const int W = img.width();
  const int H = img.height();
  const double base = rng.uniform(0.3, 0.7);
  std::array<double, 3> tint;
  for (double& t : tint) t = rng.uniform(-0.08, 0.08);
  const int G = kNoiseGrid + 1;
  std::vector<double> lattice(static_cast<std::size_t>(G) * G * 3);
  for (double& v : lattice) v = rng.uniform(-0.15, 0.15);

  for (int y = 0; y < H; ++y) {
    const double gy = (y + 0.5) / H * kNoiseGrid;
    const int y0 = std::min(static_cast<int>(gy), kNoiseGrid - 1);
    const double fy = gy - y0;
    for (int x = 0; x < W; ++x) {
      const double gx = (x + 0.5) / W * kNoiseGrid;
      const int x0 = std::min(static_cast<int>(gx), kNoiseGrid - 1);
      const double fx = gx - x0;
      for (int c = 0; c < 3; ++c) {
        auto L = [&](int yy, int xx) {
          return lattice[(static_cast<std::size_t>(yy) * G + xx) * 3 + c];
        };
        const double smooth =
            (1 - fy) * ((1 - fx) * L(y0, x0) + fx * L(y0, x0 + 1)) +
            fy * ((1 - fx) * L(y0 + 1, x0) + fx * L(y0 + 1, x0 + 1));
        const double grain = rng.uniform(-0.06, 0.06);
        img.at(x, y, c) = static_cast<float>(
            std::clamp(base + tint[c] + smooth + grain, 0.0, 1.0));
      }
    }
  }
}

// Disc of diameter `size` with its box at (x0, y0). A pixel belongs to the
// disc when its center lies within size/2 of the box center; for integer
// sizes the drawn pixels span the whole size x size box.
void paint_disc(Image& img, int x0, int y0, int size, const Color& fill,
                const Color* ring) {
  const double r = 0.5 * size;
  const double cx = x0 + r;
  const double cy = y0 + r;
  for (int y = y0; y < y0 + size; ++y) {
    for (int x = x0; x < x0 + size; ++x) {
      const double dx = x + 0.5 - cx;
      const double dy = y + 0.5 - cy;
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d > r) continue;
      set(img, x, y, (ring && d >= kRingInner * r) ? *ring : fill);
    }
  }
}

void paint_square(Image& img, int x0, int y0, int size, const Color& fill) {
  for (int y = y0; y < y0 + size; ++y) {
    for (int x = x0; x < x0 + size; ++x) set(img, x, y, fill);
  }
}

std::string sample_id(const CorpusSpec& spec, int index) {
  char buf[32];
  if (index < spec.n_positive) {
    std::snprintf(buf, sizeof(buf), "pos_%05d", index);
  } else {
    std::snprintf(buf, sizeof(buf), "neg_%05d", index - spec.n_positive);
  }
  return buf;
}

nlohmann::ordered_json box_number(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    return static_cast<std::int64_t>(v);
  }
  return v;
}

}  // namespace

void CorpusSpec::validate() const {
  if (n_positive < 1 || n_negative < 1) {
    throw std::invalid_argument("CorpusSpec: counts must be >= 1");
  }
  if (image_size < 8) {
    throw std::invalid_argument("CorpusSpec: image_size must be >= 8");
  }
  if (glyph_size_min < 2 || glyph_size_max < glyph_size_min ||
      glyph_size_max > image_size) {
    throw std::invalid_argument("CorpusSpec: glyph sizes must fit the image");
  }
  if (glyphs_per_positive_min < 1 ||
      glyphs_per_positive_max < glyphs_per_positive_min) {
    throw std::invalid_argument("CorpusSpec: bad glyphs_per_positive range");
  }
  if (!(distractor_rate >= 0.0 && distractor_rate <= 1.0)) {
    throw std::invalid_argument("CorpusSpec: distractor_rate must be in [0,1]");
  }
}

Sample render_sample(const CorpusSpec& spec, int index) {
  spec.validate();
  if (index < 0 || index >= spec.n_positive + spec.n_negative) {
    throw std::out_of_range("render_sample: index out of range");
  }
  Sample s;
  s.entry.id = sample_id(spec, index);
  s.entry.path = "images/" + s.entry.id + ".png";
  s.entry.label = index < spec.n_positive ? Label::kPositive : Label::kNegative;

  Rng rng(derive_seed(spec.seed, fnv1a(s.entry.id)));
  const int S = spec.image_size;
  s.image = Image(S, S, 3);
  paint_background(s.image, rng);

  if (s.entry.label == Label::kPositive) {
    const int count = rng.between(spec.glyphs_per_positive_min,
                                  spec.glyphs_per_positive_max);
    for (int g = 0; g < count; ++g) {
      // A few placement attempts to avoid overlapping an earlier glyph; the
      // last attempt is kept regardless.
      BBox box;
      for (int attempt = 0; attempt < 20; ++attempt) {
        const int size = rng.between(spec.glyph_size_min, spec.glyph_size_max);
        box = BBox{static_cast<double>(rng.between(0, S - size)),
                   static_cast<double>(rng.between(0, S - size)),
                   static_cast<double>(size), static_cast<double>(size)};
        const bool clear = std::none_of(
            s.entry.boxes.begin(), s.entry.boxes.end(),
            [&](const BBox& b) { return intersect_area(b, box) > 0; });
        if (clear) break;
      }
      const Color fill = jitter(kGlyphHue, rng);
      const Color ring = jitter(kRingHue, rng);
      paint_disc(s.image, static_cast<int>(box.x), static_cast<int>(box.y),
                 static_cast<int>(box.w), fill, &ring);
      s.entry.boxes.push_back(box);
    }
  } else if (rng.uniform() < spec.distractor_rate) {
    const int size = rng.between(spec.glyph_size_min, spec.glyph_size_max);
    const int x = rng.between(0, S - size);
    const int y = rng.between(0, S - size);
    const Color fill = jitter(kGlyphHue, rng);
    if (rng.uniform() < 0.5) {
      paint_square(s.image, x, y, size, fill);
    } else {
      // The ringless disc takes either glyph hue, so neither colour alone
      // identifies a positive image.
      const Color disc = rng.uniform() < 0.5 ? fill : jitter(kRingHue, rng);
      paint_disc(s.image, x, y, size, disc, nullptr);
    }
  }
  return s;
}

std::vector<Sample> render_corpus(const CorpusSpec& spec) {
  spec.validate();
  const int n = spec.n_positive + spec.n_negative;
  std::vector<Sample> out(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < n; ++i) out[i] = render_sample(spec, i);
  return out;
}

std::vector<ManifestEntry> generate_corpus(const CorpusSpec& spec,
                                           const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) {
    throw DataError("cannot create " + (out_dir / "images").string() + ": " +
                    ec.message());
  }
  const int n = spec.n_positive + spec.n_negative;
  std::vector<ManifestEntry> entries(n);
  std::vector<std::string> failures(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < n; ++i) {
    Sample s = render_sample(spec, i);
    try {
      save_image(s.image, out_dir / s.entry.path);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
    entries[i] = std::move(s.entry);
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw DataError(f);
  }
  write_manifest(entries, out_dir / "manifest.jsonl");
  return entries;
}

std::string manifest_line(const ManifestEntry& entry) {
  nlohmann::ordered_json j;
  j["id"] = entry.id;
  j["path"] = entry.path;
  j["label"] = entry.label == Label::kPositive ? "pos" : "neg";
  j["boxes"] = nlohmann::ordered_json::array();
  for (const BBox& b : entry.boxes) {
    j["boxes"].push_back({box_number(b.x), box_number(b.y), box_number(b.w),
                          box_number(b.h)});
  }
  if (entry.category) j["category"] = *entry.category;
  return j.dump();
}

ManifestEntry parse_manifest_line(const std::string& line) {
  ManifestEntry e;
  try {
    const auto j = nlohmann::json::parse(line);
    e.id = j.at("id").get<std::string>();
    e.path = j.at("path").get<std::string>();
    const auto label = j.at("label").get<std::string>();
    if (label == "pos") {
      e.label = Label::kPositive;
    } else if (label == "neg") {
      e.label = Label::kNegative;
    } else {
      throw DataError("label must be \"pos\" or \"neg\", got \"" + label + "\"");
    }
    if (j.contains("boxes")) {
      for (const auto& b : j.at("boxes")) {
        if (!b.is_array() || b.size() != 4) {
          throw DataError("box must be [x, y, w, h]");
        }
        BBox box{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                 b[3].get<double>()};
        if (!box.valid()) throw DataError("box with non-positive size");
        e.boxes.push_back(box);
      }
    }
    if (j.contains("category") && !j.at("category").is_null()) {
      e.category = j.at("category").get<std::string>();
    }
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("malformed manifest record: ") + ex.what());
  }
  return e;
}

void write_manifest(std::span<const ManifestEntry> entries,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + path.string());
  for (const auto& e : entries) out << manifest_line(e) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_manifest_line(line));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  return out;
}

}  // namespace wmil
