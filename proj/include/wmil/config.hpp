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

#ifndef WMIL_CONFIG_HPP_
#define WMIL_CONFIG_HPP_

#include <filesystem>
#include <istream>
#include <map>
#include <string>

#include "wmil/synthdata.hpp"
#include "wmil/trainer.hpp"

namespace wmil {

// Flat "key = value" text. Blank lines and lines starting with '#' are
// ignored; later keys override earlier ones.
using KeyValues = std::map<std::string, std::string>;

// Throws std::invalid_argument with the offending line number.
KeyValues parse_key_values(std::istream& in);
// Throws DataError if the file cannot be opened.
KeyValues read_key_values(const std::filesystem::path& path);

// Applies recognized keys on top of the defaults. Unknown keys and
// unparsable values throw std::invalid_argument.
//
// Training keys: mode, learning_rate, momentum, epochs, batch_bags,
// subsample_k (integer or "none"), input_size, seed, checkpoint_every,
// val_fraction, threshold, scale_factors (comma list), regions_per_positive,
// max_displacement, rng_seed.
TrainConfig train_config_from(const KeyValues& kv);

// Corpus keys: n_positive, n_negative, image_size, glyph_size_range ("a,b"),
// glyph_size_min, glyph_size_max, glyphs_per_positive ("a,b"),
// distractor_rate, seed.
CorpusSpec corpus_spec_from(const KeyValues& kv);

std::string to_key_values(const TrainConfig& config);

}  // namespace wmil

#endif  // WMIL_CONFIG_HPP_
