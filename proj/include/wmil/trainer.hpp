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

#ifndef WMIL_TRAINER_HPP_
#define WMIL_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wmil/baggen.hpp"
#include "wmil/corpus.hpp"
#include "wmil/model.hpp"

namespace wmil {

enum class TrainMode {
  kWeightedMil,       // bag loss with overlap-derived weights
  kUnweightedMil,     // bag loss with uniform weights over overlapping regions
  kRegionSupervised,  // per-region cross-entropy, label = degree > 0.5
  kWholeImage,        // one full-frame region per image
};

std::string_view to_string(TrainMode mode);
// Throws std::invalid_argument for unknown names.
TrainMode parse_train_mode(std::string_view name);

struct TrainConfig {
  TrainMode mode = TrainMode::kWeightedMil;
  double learning_rate = 0.01;
  double momentum = 0.9;
  int epochs = 10;
  int batch_bags = 8;
  std::optional<int> subsample_k;
  int input_size = 64;
  std::uint64_t seed = 1;
  int checkpoint_every = 0;  // 0 disables periodic checkpoints
  // Per-image bag streams are derived from (seed, bag.rng_seed, image id,
  // epoch).
  BagSpec bag;
  double val_fraction = 0.1;
  double threshold = 0.5;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double val_detection_rate = 0.0;  // NaN when there is no validation split
  double wall_seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;

  // "epoch,mean_loss,val_detection_rate,wall_seconds" plus one row per epoch.
  std::string to_csv(bool include_wall_time = true) const;
  void write_csv(const std::filesystem::path& path) const;
};

struct TrainResult {
  ModelParams params;
  OptimizerState state;
  TrainLog log;
};

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
  std::function<void(const Checkpoint&)> on_checkpoint;
};

// Training/validation split by a seeded hash of each image id.
std::pair<std::vector<int>, std::vector<int>> split_train_validation(
    const Corpus& corpus, const TrainConfig& config);

// The bag the given mode trains on for image `index` in `epoch`.
Bag training_bag(const Corpus& corpus, int index, const TrainConfig& config,
                 int epoch);

struct BagObjective {
  double loss = 0.0;
  std::vector<double> grad_h;
};

// Loss and dL/dh_i of one bag under the given mode.
BagObjective bag_objective(TrainMode mode, const Bag& bag,
                           std::span<const InstanceOutput> outputs);

// Minibatch momentum SGD (v <- mu v - lr g; theta <- theta + v) with g the
// mean parameter gradient over the bags of a batch. Resuming from a
// checkpoint that carries optimizer state continues the run bit-exactly.
// Throws DataError for unusable corpora and NumericalError on a non-finite
// loss.
TrainResult train(const Corpus& corpus, const TrainConfig& config,
                  const std::optional<Checkpoint>& resume = std::nullopt,
                  const TrainHooks& hooks = {});

}  // namespace wmil

#endif  // WMIL_TRAINER_HPP_
