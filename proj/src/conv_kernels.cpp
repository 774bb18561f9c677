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

#include "wmil/conv_kernels.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <vector>

namespace wmil::kernels {
namespace {

inline std::size_t plane(int size) {
  return static_cast<std::size_t>(size) * size;
}

// o[x] += sum_k w[k] * tap_k(x) for one output row.
inline void conv_row(double* __restrict o, const double* __restrict r0,
                     const double* __restrict r1, const double* __restrict r2,
                     const double* __restrict w, int n) {
  const double w0 = w[0], w1 = w[1], w2 = w[2];
  const double w3 = w[3], w4 = w[4], w5 = w[5];
  const double w6 = w[6], w7 = w[7], w8 = w[8];
  for (int x = 0; x < n; ++x) {
    o[x] += w0 * r0[x] + w1 * r0[x + 1] + w2 * r0[x + 2] + w3 * r1[x] +
            w4 * r1[x + 1] + w5 * r1[x + 2] + w6 * r2[x] + w7 * r2[x + 1] +
            w8 * r2[x + 2];
  }
}

}  // namespace

void conv3x3_forward(std::span<const double> in_padded, int cin, int size,
                     std::span<const double> weight,
                     std::span<const double> bias, int cout,
                     std::span<double> out) {
  const int P = size + 2;
  for (int oc = 0; oc < cout; ++oc) {
    double* o = out.data() + oc * plane(size);
    std::fill(o, o + plane(size), bias.empty() ? 0.0 : bias[oc]);
    for (int ic = 0; ic < cin; ++ic) {
      const double* w = weight.data() + (static_cast<std::size_t>(oc) * cin + ic) * 9;
      const double* in = in_padded.data() + ic * plane(P);
      for (int y = 0; y < size; ++y) {
        const double* r0 = in + static_cast<std::size_t>(y) * P;
        conv_row(o + static_cast<std::size_t>(y) * size, r0, r0 + P,
                 r0 + 2 * P, w, size);
      }
    }
  }
}

void conv3x3_backward_params(std::span<const double> in_padded, int cin,
                             int size, std::span<const double> grad_out,
                             int cout, std::span<double> grad_weight,
                             std::span<double> grad_bias) {
  const int P = size + 2;
  const std::size_t n = plane(size);
  // Unfold the input into one contiguous row per (ic, tap), so that each
  // weight gradient becomes a dot product of two contiguous vectors.
  const int rows = cin * 9;
  std::vector<double> cols(static_cast<std::size_t>(rows) * n);
  for (int ic = 0; ic < cin; ++ic) {
    const double* in = in_padded.data() + ic * plane(P);
    for (int k = 0; k < 9; ++k) {
      double* dst = cols.data() + (static_cast<std::size_t>(ic) * 9 + k) * n;
      const double* src = in + (k / 3) * P + (k % 3);
      for (int y = 0; y < size; ++y) {
        std::copy(src + static_cast<std::size_t>(y) * P,
                  src + static_cast<std::size_t>(y) * P + size,
                  dst + static_cast<std::size_t>(y) * size);
      }
    }
  }

  for (int oc = 0; oc < cout; ++oc) {
    const double* __restrict g = grad_out.data() + oc * n;
    double bias_sum = 0.0;
#pragma omp simd reduction(+ : bias_sum)
    for (std::size_t i = 0; i < n; ++i) bias_sum += g[i];
    grad_bias[oc] += bias_sum;

    double* gw = grad_weight.data() + static_cast<std::size_t>(oc) * rows;
    int j = 0;
    for (; j + 4 <= rows; j += 4) {
      const double* __restrict c0 = cols.data() + j * n;
      const double* __restrict c1 = c0 + n;
      const double* __restrict c2 = c1 + n;
      const double* __restrict c3 = c2 + n;
      double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
#pragma omp simd reduction(+ : s0, s1, s2, s3)
      for (std::size_t i = 0; i < n; ++i) {
        s0 += g[i] * c0[i];
        s1 += g[i] * c1[i];
        s2 += g[i] * c2[i];
        s3 += g[i] * c3[i];
      }
      gw[j] += s0;
      gw[j + 1] += s1;
      gw[j + 2] += s2;
      gw[j + 3] += s3;
    }
    for (; j < rows; ++j) {
      const double* __restrict c = cols.data() + j * n;
      double s = 0;
#pragma omp simd reduction(+ : s)
      for (std::size_t i = 0; i < n; ++i) s += g[i] * c[i];
      gw[j] += s;
    }
  }
}

void conv3x3_backward_input(std::span<const double> grad_out_padded, int cout,
                            int size, std::span<const double> weight, int cin,
                            std::span<double> grad_in) {
  // The input gradient is a same-padded correlation of dL/dout with the
  // spatially flipped, channel-transposed kernel.
  std::vector<double> flipped(static_cast<std::size_t>(cin) * cout * 9);
  for (int oc = 0; oc < cout; ++oc) {
    for (int ic = 0; ic < cin; ++ic) {
      const double* w = weight.data() + (static_cast<std::size_t>(oc) * cin + ic) * 9;
      double* f = flipped.data() + (static_cast<std::size_t>(ic) * cout + oc) * 9;
      for (int k = 0; k < 9; ++k) f[k] = w[8 - k];
    }
  }
  conv3x3_forward(grad_out_padded, cout, size, flipped, {}, cin, grad_in);
}

void relu_maxpool_forward(std::span<const double> pre, int channels, int size,
                          std::span<double> pooled, bool padded_out,
                          std::span<std::uint8_t> argmax) {
  const int half = size / 2;
  const int stride = padded_out ? half + 2 : half;
  const int offset = padded_out ? stride + 1 : 0;
  if (padded_out) std::fill(pooled.begin(), pooled.end(), 0.0);
  for (int c = 0; c < channels; ++c) {
    const double* z = pre.data() + c * plane(size);
    double* p = pooled.data() + c * plane(stride) + offset;
    std::uint8_t* am = argmax.data() + c * plane(half);
    for (int py = 0; py < half; ++py) {
      const double* z0 = z + static_cast<std::size_t>(2 * py) * size;
      const double* z1 = z0 + size;
      for (int px = 0; px < half; ++px) {
        const double taps[4] = {z0[2 * px], z0[2 * px + 1], z1[2 * px],
                                z1[2 * px + 1]};
        std::uint8_t best = 0;
        for (std::uint8_t k = 1; k < 4; ++k) {
          if (taps[k] > taps[best]) best = k;
        }
        am[py * half + px] = best;
        p[static_cast<std::size_t>(py) * stride + px] = std::max(taps[best], 0.0);
      }
    }
  }
}

void relu_maxpool_backward(std::span<const double> grad_pooled,
                           std::span<const double> pooled, bool padded_pooled,
                           std::span<const std::uint8_t> argmax, int channels,
                           int size, std::span<double> grad_pre) {
  const int half = size / 2;
  const int stride = padded_pooled ? half + 2 : half;
  const int offset = padded_pooled ? stride + 1 : 0;
  std::fill(grad_pre.begin(), grad_pre.end(), 0.0);
  for (int c = 0; c < channels; ++c) {
    const double* g = grad_pooled.data() + c * plane(half);
    const double* p = pooled.data() + c * plane(stride) + offset;
    const std::uint8_t* am = argmax.data() + c * plane(half);
    double* gz = grad_pre.data() + c * plane(size);
    for (int py = 0; py < half; ++py) {
      for (int px = 0; px < half; ++px) {
        if (!(p[static_cast<std::size_t>(py) * stride + px] > 0.0)) continue;
        const int k = am[py * half + px];
        const int y = 2 * py + (k >> 1);
        const int x = 2 * px + (k & 1);
        gz[static_cast<std::size_t>(y) * size + x] = g[py * half + px];
      }
    }
  }
}

void pad_map(std::span<const double> in, int channels, int size,
             std::span<double> out_padded) {
  const int P = size + 2;
  std::fill(out_padded.begin(), out_padded.end(), 0.0);
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < size; ++y) {
      const double* src = in.data() + c * plane(size) + static_cast<std::size_t>(y) * size;
      double* dst = out_padded.data() + c * plane(P) + static_cast<std::size_t>(y + 1) * P + 1;
      std::copy(src, src + size, dst);
    }
  }
}

}  // namespace wmil::kernels
