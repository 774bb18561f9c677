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

#include "wmil/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include "wmil/conv_kernels.hpp"
#include "wmil/errors.hpp"
#include "wmil/random.hpp"

namespace wmil {
namespace {

std::size_t sq(int n) { return static_cast<std::size_t>(n) * n; }

std::uint64_t digest(std::span<const double> values) {
  std::uint64_t h = 0x243f6a8885a308d3ULL ^ values.size();
  for (double v : values) {
    h = (h ^ std::bit_cast<std::uint64_t>(v)) * 0x100000001b3ULL;
    h ^= h >> 29;
  }
  return h;
}

void check_params(const ModelParams& params, const ParamLayout& layout) {
  if (params.values.size() != layout.total) {
    throw std::invalid_argument("model: parameter count " +
                                std::to_string(params.values.size()) +
                                " does not match architecture (" +
                                std::to_string(layout.total) + ")");
  }
}

struct BackwardScratch {
  std::vector<double> grad_pooled;
  std::vector<double> grad_pre;
  std::vector<double> grad_pre_padded;
};

// --- little-endian serialization -------------------------------------------

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string data, std::string name)
      : data_(std::move(data)), name_(std::move(name)) {}

  void bytes(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  bool at_end() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw DataError("checkpoint " + name_ + " is truncated");
    }
  }
  std::string data_;
  std::string name_;
  std::size_t pos_ = 0;
};

constexpr char kMagic[8] = {'W', 'M', 'I', 'L', 'C', 'K', 'P', 'T'};

}  // namespace

void Architecture::validate() const {
  if (input_size < 8 || input_size % 8 != 0) {
    throw std::invalid_argument("architecture: input_size must be a positive "
                                "multiple of 8, got " +
                                std::to_string(input_size));
  }
  if (channels[0] != 3) {
    throw std::invalid_argument("architecture: input must have 3 channels");
  }
  for (int c : channels) {
    if (c <= 0) throw std::invalid_argument("architecture: bad channel count");
  }
}

ParamLayout::ParamLayout(const Architecture& arch) {
  arch.validate();
  std::size_t offset = 0;
  int size = arch.input_size;
  for (int b = 0; b < Architecture::kBlocks; ++b) {
    Conv& c = conv[b];
    c.in = arch.channels[b];
    c.out = arch.channels[b + 1];
    c.size = size;
    c.weight = offset;
    offset += static_cast<std::size_t>(c.out) * c.in * 9;
    c.bias = offset;
    offset += c.out;
    size /= 2;
  }
  pooled_size = size;
  fc_weight = offset;
  offset += arch.channels.back();
  fc_bias = offset;
  offset += 1;
  total = offset;
}

ModelParams init_params(const Architecture& arch, std::uint64_t seed) {
  ModelParams params = zero_params(arch);
  params.seed = seed;
  const ParamLayout layout(arch);
  Rng rng(derive_seed(seed, 0x1a1dULL));
  auto fill = [&](std::size_t offset, std::size_t count, double fan_in,
                  double fan_out) {
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < count; ++i) {
      params.values[offset + i] = rng.uniform(-s, s);
    }
  };
  for (const auto& c : layout.conv) {
    fill(c.weight, static_cast<std::size_t>(c.out) * c.in * 9, 9.0 * c.in,
         9.0 * c.out);
  }
  fill(layout.fc_weight, arch.channels.back(), arch.channels.back(), 1.0);
  return params;
}

ModelParams zero_params(const Architecture& arch) {
  ModelParams params;
  params.arch = arch;
  params.values.assign(ParamLayout(arch).total, 0.0);
  return params;
}

InstanceOutput instance_output(double h) {
  InstanceOutput out;
  out.h = h;
  if (h >= 0) {
    const double e = std::exp(-h);
    out.p_pos = 1.0 / (1.0 + e);
    out.p_neg = e / (1.0 + e);
  } else {
    const double e = std::exp(h);
    out.p_pos = e / (1.0 + e);
    out.p_neg = 1.0 / (1.0 + e);
  }
  return out;
}

std::vector<double> region_tensor(const Image& region) {
  if (region.channels() != 3) {
    throw std::invalid_argument("region_tensor: expected 3 channels");
  }
  const int w = region.width();
  const int h = region.height();
  std::vector<double> t(3 * static_cast<std::size_t>(w) * h);
  const auto& px = region.pixels();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      t[c * n + i] = static_cast<double>(px[i * 3 + c]) - 0.5;
    }
  }
  return t;
}

InstanceOutput forward_tensor(const ModelParams& params,
                              std::span<const double> input,
                              ActivationCache& cache) {
  const ParamLayout layout(params.arch);
  check_params(params, layout);
  const int S = params.arch.input_size;
  if (input.size() != 3 * sq(S)) {
    throw std::invalid_argument("forward: input tensor has " +
                                std::to_string(input.size()) +
                                " values, expected 3x" + std::to_string(S) +
                                "x" + std::to_string(S));
  }
  const double* theta = params.values.data();

  cache.arch_ = params.arch;
  cache.params_digest_ = digest(params.values);
  cache.inputs_[0].resize(3 * sq(S + 2));
  kernels::pad_map(input, 3, S, cache.inputs_[0]);

  for (int b = 0; b < Architecture::kBlocks; ++b) {
    const auto& c = layout.conv[b];
    cache.pre_[b].resize(static_cast<std::size_t>(c.out) * sq(c.size));
    cache.argmax_[b].resize(static_cast<std::size_t>(c.out) * sq(c.size / 2));
    kernels::conv3x3_forward(
        cache.inputs_[b], c.in, c.size,
        {theta + c.weight, static_cast<std::size_t>(c.out) * c.in * 9},
        {theta + c.bias, static_cast<std::size_t>(c.out)}, c.out,
        cache.pre_[b]);
    const bool last = b + 1 == Architecture::kBlocks;
    std::vector<double>& pooled = last ? cache.last_pooled_ : cache.inputs_[b + 1];
    pooled.resize(static_cast<std::size_t>(c.out) *
                  sq(last ? c.size / 2 : c.size / 2 + 2));
    kernels::relu_maxpool_forward(cache.pre_[b], c.out, c.size, pooled, !last,
                                  cache.argmax_[b]);
  }

  const int C = params.arch.channels.back();
  const std::size_t Q = sq(layout.pooled_size);
  cache.features_.resize(C);
  double h = theta[layout.fc_bias];
  for (int c = 0; c < C; ++c) {
    const double* p = cache.last_pooled_.data() + c * Q;
    double s = 0.0;
    for (std::size_t i = 0; i < Q; ++i) s += p[i];
    cache.features_[c] = s / static_cast<double>(Q);
    h += theta[layout.fc_weight + c] * cache.features_[c];
  }
  cache.filled_ = true;
  return instance_output(h);
}

InstanceOutput forward(const ModelParams& params, const Image& region,
                       ActivationCache& cache) {
  if (region.width() != params.arch.input_size ||
      region.height() != params.arch.input_size || region.channels() != 3) {
    throw std::invalid_argument(
        "forward: region must be " + std::to_string(params.arch.input_size) +
        "x" + std::to_string(params.arch.input_size) + "x3");
  }
  return forward_tensor(params, region_tensor(region), cache);
}

std::pair<InstanceOutput, ActivationCache> forward(const ModelParams& params,
                                                   const Image& region) {
  ActivationCache cache;
  InstanceOutput out = forward(params, region, cache);
  return {out, std::move(cache)};
}

void backward_accumulate(const ModelParams& params,
                         const ActivationCache& cache, double dL_dh,
                         std::span<double> grad) {
  const ParamLayout layout(params.arch);
  check_params(params, layout);
  if (!cache.filled_ || !(cache.arch_ == params.arch) ||
      cache.params_digest_ != digest(params.values)) {
    throw std::logic_error(
        "backward: activation cache does not match these parameters");
  }
  if (grad.size() != layout.total) {
    throw std::invalid_argument("backward: gradient buffer has wrong size");
  }
  if (dL_dh == 0.0) return;

  const double* theta = params.values.data();
  const int C = params.arch.channels.back();
  const std::size_t Q = sq(layout.pooled_size);

  grad[layout.fc_bias] += dL_dh;
  thread_local BackwardScratch scratch;
  scratch.grad_pooled.assign(static_cast<std::size_t>(C) * Q, 0.0);
  for (int c = 0; c < C; ++c) {
    grad[layout.fc_weight + c] += dL_dh * cache.features_[c];
    const double g = dL_dh * theta[layout.fc_weight + c] / static_cast<double>(Q);
    std::fill_n(scratch.grad_pooled.begin() + c * Q, Q, g);
  }

  for (int b = Architecture::kBlocks - 1; b >= 0; --b) {
    const auto& c = layout.conv[b];
    const bool last = b + 1 == Architecture::kBlocks;
    const std::vector<double>& pooled = last ? cache.last_pooled_ : cache.inputs_[b + 1];
    scratch.grad_pre.resize(static_cast<std::size_t>(c.out) * sq(c.size));
    kernels::relu_maxpool_backward(scratch.grad_pooled, pooled, !last,
                                   cache.argmax_[b], c.out, c.size,
                                   scratch.grad_pre);
    kernels::conv3x3_backward_params(
        cache.inputs_[b], c.in, c.size, scratch.grad_pre, c.out,
        grad.subspan(c.weight, static_cast<std::size_t>(c.out) * c.in * 9),
        grad.subspan(c.bias, c.out));
    if (b == 0) break;
    scratch.grad_pre_padded.resize(static_cast<std::size_t>(c.out) * sq(c.size + 2));
    kernels::pad_map(scratch.grad_pre, c.out, c.size, scratch.grad_pre_padded);
    scratch.grad_pooled.resize(static_cast<std::size_t>(c.in) * sq(c.size));
    kernels::conv3x3_backward_input(
        scratch.grad_pre_padded, c.out, c.size,
        {theta + c.weight, static_cast<std::size_t>(c.out) * c.in * 9}, c.in,
        scratch.grad_pooled);
  }
}

std::vector<double> backward(const ModelParams& params,
                             const ActivationCache& cache, double dL_dh) {
  std::vector<double> grad(ParamLayout(params.arch).total, 0.0);
  backward_accumulate(params, cache, dL_dh, grad);
  return grad;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const ModelParams& p = ckpt.params;
  check_params(p, ParamLayout(p.arch));
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(p.arch.input_size));
  w.u32(Architecture::kBlocks);
  for (int c : p.arch.channels) w.u32(static_cast<std::uint32_t>(c));
  w.u64(p.seed);
  w.u64(p.values.size());
  for (double v : p.values) w.f64(v);
  w.u8(ckpt.state ? 1 : 0);
  if (ckpt.state) {
    w.u32(static_cast<std::uint32_t>(ckpt.state->epochs_completed));
    w.u64(ckpt.state->velocity.size());
    for (double v : ckpt.state->velocity) w.f64(v);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
  if (!out) throw DataError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  Reader r(std::string(std::istreambuf_iterator<char>(in), {}), path.string());

  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path.string() + " is not a wmil checkpoint");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint version " + std::to_string(version) +
                    " is not supported (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ckpt;
  ckpt.params.arch.input_size = static_cast<int>(r.u32());
  if (r.u32() != Architecture::kBlocks) {
    throw DataError("checkpoint has an unsupported block count");
  }
  for (int& c : ckpt.params.arch.channels) c = static_cast<int>(r.u32());
  try {
    ckpt.params.arch.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("corrupt checkpoint architecture: ") + e.what());
  }
  ckpt.params.seed = r.u64();
  const std::uint64_t count = r.u64();
  if (count != ParamLayout(ckpt.params.arch).total || count * 8 > r.remaining()) {
    throw DataError("checkpoint parameter count does not match architecture");
  }
  ckpt.params.values.resize(count);
  for (double& v : ckpt.params.values) {
    v = r.f64();
    if (!std::isfinite(v)) throw DataError("checkpoint holds non-finite values");
  }
  if (r.u8() != 0) {
    OptimizerState state;
    state.epochs_completed = static_cast<int>(r.u32());
    const std::uint64_t n = r.u64();
    if (n != count) throw DataError("checkpoint optimizer state size mismatch");
    state.velocity.resize(n);
    for (double& v : state.velocity) v = r.f64();
    ckpt.state = std::move(state);
  }
  if (!r.at_end()) throw DataError("trailing bytes in checkpoint " + path.string());
  return ckpt;
}

void save_params(const ModelParams& params, const std::filesystem::path& path) {
  save_checkpoint(Checkpoint{params, std::nullopt}, path);
}

ModelParams load_params(const std::filesystem::path& path) {
  return load_checkpoint(path).params;
}

}  // namespace wmil
