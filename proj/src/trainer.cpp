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

#include "wmil/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "wmil/errors.hpp"
#include "wmil/infer.hpp"
#include "wmil/metrics.hpp"
#include "wmil/milloss.hpp"
#include "wmil/random.hpp"

namespace wmil {
namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;
constexpr std::uint64_t kBagStream = 0x424147ULL;
constexpr std::uint64_t kSubsampleStream = 0x535542ULL;
constexpr std::uint64_t kSplitStream = 0x53504c4954ULL;

bool is_mil(TrainMode mode) {
  return mode == TrainMode::kWeightedMil || mode == TrainMode::kUnweightedMil;
}

void check_corpus(const Corpus& corpus, const TrainConfig& config) {
  if (corpus.size() == 0) throw DataError("train: corpus is empty");
  if (corpus.images.size() != corpus.entries.size()) {
    throw DataError("train: corpus images do not match entries");
  }
  bool any_positive = false;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& e = corpus.entries[i];
    if (corpus.images[i].channels() != 3) {
      throw DataError("train: image " + e.id + " is not RGB");
    }
    if (e.label != Label::kPositive) continue;
    any_positive = true;
    if (e.boxes.empty() && config.mode != TrainMode::kWholeImage) {
      throw DataError("train: positive image " + e.id +
                      " has no annotation boxes");
    }
  }
  if (!any_positive && is_mil(config.mode)) {
    throw DataError("train: corpus has no positive bag");
  }
}

}  // namespace

std::string_view to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kWeightedMil:
      return "weighted_mil";
    case TrainMode::kUnweightedMil:
      return "unweighted_mil";
    case TrainMode::kRegionSupervised:
      return "region_supervised";
    case TrainMode::kWholeImage:
      return "whole_image";
  }
  return "?";
}

TrainMode parse_train_mode(std::string_view name) {
  for (TrainMode m : {TrainMode::kWeightedMil, TrainMode::kUnweightedMil,
                      TrainMode::kRegionSupervised, TrainMode::kWholeImage}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown training mode: " + std::string(name));
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be >= 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("momentum must be in [0, 1)");
  }
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_bags < 1) throw std::invalid_argument("batch_bags must be >= 1");
  if (subsample_k && *subsample_k < 2) {
    throw std::invalid_argument("subsample_k must be >= 2");
  }
  if (checkpoint_every < 0) {
    throw std::invalid_argument("checkpoint_every must be >= 0");
  }
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw std::invalid_argument("val_fraction must be in [0, 1)");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("threshold must be in (0, 1)");
  }
  Architecture{input_size}.validate();
  bag.validate();
}

std::string TrainLog::to_csv(bool include_wall_time) const {
  std::string out = include_wall_time
                        ? "epoch,mean_loss,val_detection_rate,wall_seconds\n"
                        : "epoch,mean_loss,val_detection_rate\n";
  char buf[128];
  for (const auto& r : epochs) {
    if (include_wall_time) {
      std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.3f\n", r.epoch,
                    r.mean_loss, r.val_detection_rate, r.wall_seconds);
    } else {
      std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", r.epoch, r.mean_loss,
                    r.val_detection_rate);
    }
    out += buf;
  }
  return out;
}

void TrainLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_csv();
}

std::pair<std::vector<int>, std::vector<int>> split_train_validation(
    const Corpus& corpus, const TrainConfig& config) {
  std::vector<int> train_idx, val_idx;
  const auto cut = static_cast<std::uint64_t>(config.val_fraction * 1000.0);
  for (int i = 0; i < static_cast<int>(corpus.size()); ++i) {
    const std::uint64_t h =
        derive_seed(config.seed, kSplitStream, fnv1a(corpus.entries[i].id));
    (h % 1000 < cut ? val_idx : train_idx).push_back(i);
  }
  if (train_idx.empty()) {
    throw DataError("train: validation split leaves no training images");
  }
  return {std::move(train_idx), std::move(val_idx)};
}

Bag training_bag(const Corpus& corpus, int index, const TrainConfig& config,
                 int epoch) {
  const ManifestEntry& e = corpus.entries.at(index);
  const Image& img = corpus.images.at(index);
  Bag bag;
  if (config.mode == TrainMode::kWholeImage) {
    bag.label = e.label;
    bag.regions = {img.frame()};
    const double d = e.label == Label::kPositive ? 1.0 : 0.0;
    bag.degrees = {d};
    bag.weights = {d};
    bag.n_pos = d > 0 ? 1 : 0;
    bag.n_neg = 1 - bag.n_pos;
  } else if (e.label == Label::kPositive) {
    BagSpec spec = config.bag;
    spec.rng_seed = derive_seed(config.seed, kBagStream, config.bag.rng_seed,
                                fnv1a(e.id), static_cast<std::uint64_t>(epoch));
    bag = generate_positive_bag(img, e.boxes, spec);
  } else {
    bag = generate_negative_bag(img);
  }
  bag.image_id = e.id;
  if (config.subsample_k) {
    bag = subsample_bag(bag, *config.subsample_k,
                        derive_seed(config.seed, kSubsampleStream, fnv1a(e.id),
                                    static_cast<std::uint64_t>(epoch)));
  }
  return bag;
}

BagObjective bag_objective(TrainMode mode, const Bag& bag,
                           std::span<const InstanceOutput> outputs) {
  BagObjective obj;
  switch (mode) {
    case TrainMode::kWeightedMil:
    case TrainMode::kWholeImage: {
      BagLossResult r = bag_loss(outputs, bag.weights);
      obj.loss = r.loss;
      obj.grad_h = std::move(r.grad_h);
      break;
    }
    case TrainMode::kUnweightedMil: {
      std::vector<double> uniform(bag.weights.size(), 0.0);
      const double w = bag.n_pos > 0 ? 1.0 / bag.n_pos : 0.0;
      for (std::size_t i = 0; i < uniform.size(); ++i) {
        if (bag.weights[i] > 0) uniform[i] = w;
      }
      BagLossResult r = bag_loss(outputs, uniform);
      obj.loss = r.loss;
      obj.grad_h = std::move(r.grad_h);
      break;
    }
    case TrainMode::kRegionSupervised: {
      std::vector<double> targets(bag.degrees.size());
      for (std::size_t i = 0; i < targets.size(); ++i) {
        targets[i] = bag.degrees[i] > 0.5 ? 1.0 : 0.0;
      }
      CrossEntropyResult r = cross_entropy_loss(outputs, targets);
      obj.loss = r.loss;
      obj.grad_h = std::move(r.grad_h);
      break;
    }
  }
  return obj;
}

TrainResult train(const Corpus& corpus, const TrainConfig& config,
                  const std::optional<Checkpoint>& resume,
                  const TrainHooks& hooks) {
  config.validate();
  check_corpus(corpus, config);
  const auto [train_idx, val_idx] = split_train_validation(corpus, config);

  const Architecture arch{config.input_size};
  TrainResult result;
  int start_epoch = 0;
  if (resume) {
    if (!(resume->params.arch == arch)) {
      throw DataError("resume checkpoint architecture does not match config");
    }
    result.params = resume->params;
    if (resume->state) {
      result.state = *resume->state;
      start_epoch = result.state.epochs_completed;
    }
  } else {
    result.params = init_params(arch, config.seed);
  }
  const std::size_t P = result.params.values.size();
  if (result.state.velocity.size() != P) result.state.velocity.assign(P, 0.0);

  std::vector<Image> val_images;
  std::vector<Label> val_labels;
  for (int i : val_idx) {
    val_images.push_back(corpus.images[i]);
    val_labels.push_back(corpus.entries[i].label);
  }

  const int S = config.input_size;
  std::vector<ActivationCache> caches;
  std::vector<InstanceOutput> outputs;
  std::vector<double> slot_grads;
  std::vector<double> grad(P);
  const auto clock_start = std::chrono::steady_clock::now();

  for (int epoch = start_epoch; epoch < config.epochs; ++epoch) {
    std::vector<int> order = train_idx;
    Rng(derive_seed(config.seed, kShuffleStream,
                    static_cast<std::uint64_t>(epoch)))
        .shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(config.batch_bags)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(config.batch_bags));
      const int B = static_cast<int>(end - begin);

      std::vector<Bag> bags(B);
#pragma omp parallel for schedule(dynamic)
      for (int b = 0; b < B; ++b) {
        bags[b] = training_bag(corpus, order[begin + b], config, epoch);
      }

      // Flatten (bag, region) pairs; a bag's regions are contiguous.
      std::vector<int> slot_bag, slot_region, bag_first(B + 1, 0);
      for (int b = 0; b < B; ++b) {
        bag_first[b] = static_cast<int>(slot_bag.size());
        for (int r = 0; r < bags[b].size(); ++r) {
          slot_bag.push_back(b);
          slot_region.push_back(r);
        }
      }
      bag_first[B] = static_cast<int>(slot_bag.size());
      const int n_slots = bag_first[B];
      if (static_cast<int>(caches.size()) < n_slots) caches.resize(n_slots);
      outputs.resize(n_slots);

#pragma omp parallel for schedule(dynamic)
      for (int s = 0; s < n_slots; ++s) {
        const Image& img = corpus.images[order[begin + slot_bag[s]]];
        const BBox& region = bags[slot_bag[s]].regions[slot_region[s]];
        outputs[s] = forward_tensor(result.params,
                                    region_tensor(crop_resize(img, region, S, S)),
                                    caches[s]);
      }

      std::vector<double> dl_dh(n_slots);
      for (int b = 0; b < B; ++b) {
        const std::span<const InstanceOutput> bag_out(
            outputs.data() + bag_first[b], bag_first[b + 1] - bag_first[b]);
        BagObjective obj = bag_objective(config.mode, bags[b], bag_out);
        if (!std::isfinite(obj.loss)) {
          throw NumericalError("non-finite loss on image " + bags[b].image_id +
                               " in epoch " + std::to_string(epoch));
        }
        loss_sum += obj.loss;
        for (std::size_t r = 0; r < obj.grad_h.size(); ++r) {
          dl_dh[bag_first[b] + r] = obj.grad_h[r] / B;
        }
      }

      slot_grads.assign(static_cast<std::size_t>(n_slots) * P, 0.0);
#pragma omp parallel for schedule(dynamic)
      for (int s = 0; s < n_slots; ++s) {
        backward_accumulate(result.params, caches[s], dl_dh[s],
                            std::span<double>(slot_grads).subspan(s * P, P));
      }
      // Fixed-order reduction keeps results independent of thread count.
      std::fill(grad.begin(), grad.end(), 0.0);
      for (int s = 0; s < n_slots; ++s) {
        const double* g = slot_grads.data() + static_cast<std::size_t>(s) * P;
        for (std::size_t i = 0; i < P; ++i) grad[i] += g[i];
      }

      auto& v = result.state.velocity;
      auto& theta = result.params.values;
      for (std::size_t i = 0; i < P; ++i) {
        v[i] = config.momentum * v[i] - config.learning_rate * grad[i];
        theta[i] += v[i];
      }
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.mean_loss = loss_sum / static_cast<double>(order.size());
    rec.val_detection_rate = std::numeric_limits<double>::quiet_NaN();
    if (!val_images.empty()) {
      const auto verdicts =
          classify_all(result.params, val_images, config.threshold);
      std::vector<Label> predicted;
      for (const auto& vd : verdicts) predicted.push_back(vd.label);
      rec.val_detection_rate = accuracy(val_labels, predicted);
    }
    rec.wall_seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - clock_start)
                           .count();
    result.log.epochs.push_back(rec);
    result.state.epochs_completed = epoch + 1;
    if (hooks.on_epoch) hooks.on_epoch(rec);
    if (hooks.on_checkpoint && config.checkpoint_every > 0 &&
        (epoch + 1) % config.checkpoint_every == 0) {
      hooks.on_checkpoint(Checkpoint{result.params, result.state});
    }
  }
  return result;
}

}  // namespace wmil
