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

#include "wmil/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>
#include <stdexcept>
#include <vector>

#include "wmil/errors.hpp"

namespace wmil {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw std::invalid_argument("config: bad value for " + key + ": \"" + value +
                              "\"");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) bad_value(key, value);
  return out;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

template <typename T>
std::pair<T, T> parse_range(const std::string& key, const std::string& value) {
  const auto parts = split_list(value);
  if (parts.size() != 2) bad_value(key, value);
  return {parse_number<T>(key, parts[0]), parse_number<T>(key, parts[1])};
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key");
    }
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  return parse_key_values(in);
}

TrainConfig train_config_from(const KeyValues& kv) {
  TrainConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "mode") {
      c.mode = parse_train_mode(value);
    } else if (key == "learning_rate") {
      c.learning_rate = parse_number<double>(key, value);
    } else if (key == "momentum") {
      c.momentum = parse_number<double>(key, value);
    } else if (key == "epochs") {
      c.epochs = parse_number<int>(key, value);
    } else if (key == "batch_bags") {
      c.batch_bags = parse_number<int>(key, value);
    } else if (key == "subsample_k") {
      if (value == "none" || value.empty()) {
        c.subsample_k.reset();
      } else {
        c.subsample_k = parse_number<int>(key, value);
      }
    } else if (key == "input_size") {
      c.input_size = parse_number<int>(key, value);
    } else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "checkpoint_every") {
      c.checkpoint_every = parse_number<int>(key, value);
    } else if (key == "val_fraction") {
      c.val_fraction = parse_number<double>(key, value);
    } else if (key == "threshold") {
      c.threshold = parse_number<double>(key, value);
    } else if (key == "scale_factors") {
      c.bag.scale_factors.clear();
      for (const auto& p : split_list(value)) {
        c.bag.scale_factors.push_back(parse_number<double>(key, p));
      }
    } else if (key == "regions_per_positive") {
      c.bag.regions_per_positive = parse_number<int>(key, value);
    } else if (key == "max_displacement") {
      c.bag.max_displacement = parse_number<double>(key, value);
    } else if (key == "rng_seed") {
      c.bag.rng_seed = parse_number<std::uint64_t>(key, value);
    } else {
      throw std::invalid_argument("config: unknown training key \"" + key + "\"");
    }
  }
  c.validate();
  return c;
}

CorpusSpec corpus_spec_from(const KeyValues& kv) {
  CorpusSpec s;
  for (const auto& [key, value] : kv) {
    if (key == "n_positive") {
      s.n_positive = parse_number<int>(key, value);
    } else if (key == "n_negative") {
      s.n_negative = parse_number<int>(key, value);
    } else if (key == "image_size") {
      s.image_size = parse_number<int>(key, value);
    } else if (key == "glyph_size_range") {
      std::tie(s.glyph_size_min, s.glyph_size_max) = parse_range<int>(key, value);
    } else if (key == "glyph_size_min") {
      s.glyph_size_min = parse_number<int>(key, value);
    } else if (key == "glyph_size_max") {
      s.glyph_size_max = parse_number<int>(key, value);
    } else if (key == "glyphs_per_positive") {
      std::tie(s.glyphs_per_positive_min, s.glyphs_per_positive_max) =
          parse_range<int>(key, value);
    } else if (key == "distractor_rate") {
      s.distractor_rate = parse_number<double>(key, value);
    } else if (key == "seed") {
      s.seed = parse_number<std::uint64_t>(key, value);
    } else {
      throw std::invalid_argument("config: unknown corpus key \"" + key + "\"");
    }
  }
  s.validate();
  return s;
}

std::string to_key_values(const TrainConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "mode = " << to_string(c.mode) << '\n'
      << "learning_rate = " << c.learning_rate << '\n'
      << "momentum = " << c.momentum << '\n'
      << "epochs = " << c.epochs << '\n'
      << "batch_bags = " << c.batch_bags << '\n'
      << "subsample_k = "
      << (c.subsample_k ? std::to_string(*c.subsample_k) : "none") << '\n'
      << "input_size = " << c.input_size << '\n'
      << "seed = " << c.seed << '\n'
      << "checkpoint_every = " << c.checkpoint_every << '\n'
      << "val_fraction = " << c.val_fraction << '\n'
      << "threshold = " << c.threshold << '\n'
      << "scale_factors = ";
  for (std::size_t i = 0; i < c.bag.scale_factors.size(); ++i) {
    out << (i ? "," : "") << c.bag.scale_factors[i];
  }
  out << '\n'
      << "regions_per_positive = " << c.bag.regions_per_positive << '\n'
      << "max_displacement = " << c.bag.max_displacement << '\n'
      << "rng_seed = " << c.bag.rng_seed << '\n';
  return out.str();
}

}  // namespace wmil
