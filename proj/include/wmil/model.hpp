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

#ifndef WMIL_MODEL_HPP_
#define WMIL_MODEL_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wmil/imaging.hpp"

namespace wmil {

// Region scorer: three blocks of conv3x3 (same padding) + ReLU + 2x2 max
// pool, global average pooling, and an affine map to the scalar logit h.
struct Architecture {
  int input_size = 64;
  std::array<int, 4> channels{3, 8, 16, 32};

  static constexpr int kBlocks = 3;

  // input_size must be a positive multiple of 8.
  void validate() const;
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

// Offsets of each tensor inside the flat parameter vector, in declaration
// order: conv{1,2,3}.weight [out][in][3][3], conv{1,2,3}.bias, fc.weight,
// fc.bias.
struct ParamLayout {
  struct Conv {
    std::size_t weight = 0;
    std::size_t bias = 0;
    int in = 0;
    int out = 0;
    int size = 0;  // spatial input size of the block
  };
  std::array<Conv, Architecture::kBlocks> conv;
  std::size_t fc_weight = 0;
  std::size_t fc_bias = 0;
  std::size_t total = 0;
  int pooled_size = 0;  // spatial size entering global average pooling

  explicit ParamLayout(const Architecture& arch);
};

struct ModelParams {
  Architecture arch;
  std::uint64_t seed = 0;  // seed used for the initialization
  std::vector<double> values;

  ParamLayout layout() const { return ParamLayout(arch); }
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Uniform(-s, s) weights with s = sqrt(6 / (fan_in + fan_out)), zero biases.
ModelParams init_params(const Architecture& arch, std::uint64_t seed);
ModelParams zero_params(const Architecture& arch);

struct InstanceOutput {
  double h = 0;
  double p_pos = 0.5;  // e^h / (e^h + 1)
  double p_neg = 0.5;  // 1 / (e^h + 1)
};

// Both probabilities are evaluated directly (never as 1 - other), so each
// keeps full relative precision when saturated.
InstanceOutput instance_output(double h);

// HWC float image -> CHW double tensor centered on 0 (x - 0.5).
std::vector<double> region_tensor(const Image& region);

// Everything backward() needs from a forward pass. Reusable across calls.
class ActivationCache {
 public:
  ActivationCache() = default;

 private:
  friend InstanceOutput forward_tensor(const ModelParams&,
                                       std::span<const double>,
                                       ActivationCache&);
  friend void backward_accumulate(const ModelParams&, const ActivationCache&,
                                  double, std::span<double>);

  Architecture arch_;
  std::uint64_t params_digest_ = 0;
  bool filled_ = false;
  // Block inputs (zero-bordered), pre-activations, pool argmax.
  std::array<std::vector<double>, Architecture::kBlocks> inputs_;
  std::array<std::vector<double>, Architecture::kBlocks> pre_;
  std::array<std::vector<std::uint8_t>, Architecture::kBlocks> argmax_;
  std::vector<double> last_pooled_;  // unpadded output of the last block
  std::vector<double> features_;     // global average pool
};

// Runs the network on a CHW tensor of the configured input size.
InstanceOutput forward_tensor(const ModelParams& params,
                              std::span<const double> input,
                              ActivationCache& cache);

InstanceOutput forward(const ModelParams& params, const Image& region,
                       ActivationCache& cache);
std::pair<InstanceOutput, ActivationCache> forward(const ModelParams& params,
                                                   const Image& region);

// grad += dL_dh * dh/dtheta. Throws std::logic_error when the cache does not
// come from a forward pass with these exact parameters.
void backward_accumulate(const ModelParams& params,
                         const ActivationCache& cache, double dL_dh,
                         std::span<double> grad);
std::vector<double> backward(const ModelParams& params,
                             const ActivationCache& cache, double dL_dh);

// Momentum buffer and progress saved alongside parameters for resumable
// training.
struct OptimizerState {
  int epochs_completed = 0;
  std::vector<double> velocity;
  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

struct Checkpoint {
  ModelParams params;
  std::optional<OptimizerState> state;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout (little-endian): "WMILCKPT", u32 version, u32 input_size,
// u32 block count, u32 channels[blocks + 1], u64 seed, u64 param count,
// f64 params[count], u8 has_state, then optionally u32 epochs_completed,
// u64 velocity count, f64 velocity[count].
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void save_params(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_params(const std::filesystem::path& path);

}  // namespace wmil

#endif  // WMIL_MODEL_HPP_
