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

#ifndef WMIL_REFERENCE_NET_HPP_
#define WMIL_REFERENCE_NET_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wmil/model.hpp"

// Serial reference implementation of the region scorer, kept for testing and
// benchmarking. Every layer is a literal loop nest with explicit bounds
// checks instead of padded buffers, and it shares no code with the
// optimized kernels. Templated on the scalar type so that finite-difference
// oracles can run in extended precision.
namespace wmil::reference {

// Map [channels][size][size].
template <typename T>
struct Map {
  int channels = 0;
  int size = 0;
  std::vector<T> v;

  Map(int c, int s) : channels(c), size(s), v(static_cast<std::size_t>(c) * s * s, T(0)) {}
  T& at(int c, int y, int x) { return v[(static_cast<std::size_t>(c) * size + y) * size + x]; }
  T at(int c, int y, int x) const { return v[(static_cast<std::size_t>(c) * size + y) * size + x]; }
};

template <typename T>
Map<T> conv3x3(const Map<T>& in, std::span<const T> theta,
               const ParamLayout::Conv& c) {
  Map<T> out(c.out, in.size);
  for (int oc = 0; oc < c.out; ++oc) {
    for (int y = 0; y < in.size; ++y) {
      for (int x = 0; x < in.size; ++x) {
        T s = theta[c.bias + oc];
        for (int ic = 0; ic < c.in; ++ic) {
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              const int iy = y + ky - 1;
              const int ix = x + kx - 1;
              if (iy < 0 || ix < 0 || iy >= in.size || ix >= in.size) continue;
              s += theta[c.weight + ((static_cast<std::size_t>(oc) * c.in + ic) * 3 + ky) * 3 + kx] *
                   in.at(ic, iy, ix);
            }
          }
        }
        out.at(oc, y, x) = s;
      }
    }
  }
  return out;
}

template <typename T>
Map<T> relu(Map<T> m) {
  for (T& x : m.v) x = x > T(0) ? x : T(0);
  return m;
}

// 2x2 max pooling; ties go to the first tap in row-major order.
template <typename T>
Map<T> maxpool(const Map<T>& in, std::vector<int>* winners) {
  Map<T> out(in.channels, in.size / 2);
  for (int c = 0; c < in.channels; ++c) {
    for (int y = 0; y < out.size; ++y) {
      for (int x = 0; x < out.size; ++x) {
        int best = 0;
        T best_v = in.at(c, 2 * y, 2 * x);
        for (int k = 1; k < 4; ++k) {
          const T v = in.at(c, 2 * y + k / 2, 2 * x + k % 2);
          if (v > best_v) {
            best_v = v;
            best = k;
          }
        }
        out.at(c, y, x) = best_v;
        if (winners) winners->push_back(best);
      }
    }
  }
  return out;
}

// Signature of every ReLU and max-pool decision taken by a forward pass.
// Two parameter vectors with equal patterns lie in the same linear piece of
// the network, where h is affine in each individual parameter.
using Pattern = std::vector<std::uint8_t>;

template <typename T>
T logit(const Architecture& arch, std::span<const T> theta,
        std::span<const T> input, Pattern* pattern = nullptr) {
  const ParamLayout layout(arch);
  Map<T> x(3, arch.input_size);
  std::copy(input.begin(), input.end(), x.v.begin());
  for (const auto& c : layout.conv) {
    Map<T> z = conv3x3(x, theta, c);
    if (pattern) {
      for (const T& v : z.v) pattern->push_back(v > T(0) ? 1 : 0);
    }
    std::vector<int> winners;
    x = maxpool(relu(std::move(z)), pattern ? &winners : nullptr);
    if (pattern) pattern->insert(pattern->end(), winners.begin(), winners.end());
  }
  T h = theta[layout.fc_bias];
  const std::size_t q = static_cast<std::size_t>(x.size) * x.size;
  for (int c = 0; c < x.channels; ++c) {
    T s = T(0);
    for (int y = 0; y < x.size; ++y) {
      for (int xx = 0; xx < x.size; ++xx) s += x.at(c, y, xx);
    }
    h += theta[layout.fc_weight + c] * (s / T(q));
  }
  return h;
}

// dh/dtheta by direct reverse-mode over the loops above (double precision).
inline std::vector<double> gradient(const Architecture& arch,
                                    std::span<const double> theta,
                                    std::span<const double> input) {
  const ParamLayout layout(arch);
  std::vector<double> grad(layout.total, 0.0);

  // Forward, keeping every intermediate.
  std::vector<Map<double>> block_in, pre;
  std::vector<std::vector<int>> winners(Architecture::kBlocks);
  Map<double> x(3, arch.input_size);
  std::copy(input.begin(), input.end(), x.v.begin());
  for (int b = 0; b < Architecture::kBlocks; ++b) {
    block_in.push_back(x);
    pre.push_back(conv3x3(x, theta, layout.conv[b]));
    x = maxpool(relu(pre.back()), &winners[b]);
  }
  const std::size_t q = static_cast<std::size_t>(x.size) * x.size;

  grad[layout.fc_bias] = 1.0;
  Map<double> g(x.channels, x.size);
  for (int c = 0; c < x.channels; ++c) {
    double s = 0;
    for (double v : std::span(x.v).subspan(c * q, q)) s += v;
    grad[layout.fc_weight + c] = s / static_cast<double>(q);
    for (std::size_t i = 0; i < q; ++i) {
      g.v[c * q + i] = theta[layout.fc_weight + c] / static_cast<double>(q);
    }
  }

  for (int b = Architecture::kBlocks - 1; b >= 0; --b) {
    const auto& c = layout.conv[b];
    const Map<double>& z = pre[b];
    // Through max pool and ReLU.
    Map<double> gz(z.channels, z.size);
    std::size_t w = 0;
    for (int ch = 0; ch < z.channels; ++ch) {
      for (int y = 0; y < g.size; ++y) {
        for (int xx = 0; xx < g.size; ++xx, ++w) {
          const int k = winners[b][w];
          const int zy = 2 * y + k / 2;
          const int zx = 2 * xx + k % 2;
          if (z.at(ch, zy, zx) > 0) gz.at(ch, zy, zx) += g.at(ch, y, xx);
        }
      }
    }
    // Through the convolution.
    const Map<double>& in = block_in[b];
    Map<double> gin(in.channels, in.size);
    for (int oc = 0; oc < c.out; ++oc) {
      for (int y = 0; y < in.size; ++y) {
        for (int xx = 0; xx < in.size; ++xx) {
          const double d = gz.at(oc, y, xx);
          grad[c.bias + oc] += d;
          for (int ic = 0; ic < c.in; ++ic) {
            for (int ky = 0; ky < 3; ++ky) {
              for (int kx = 0; kx < 3; ++kx) {
                const int iy = y + ky - 1;
                const int ix = xx + kx - 1;
                if (iy < 0 || ix < 0 || iy >= in.size || ix >= in.size) continue;
                const std::size_t wi = c.weight + ((static_cast<std::size_t>(oc) * c.in + ic) * 3 + ky) * 3 + kx;
                grad[wi] += d * in.at(ic, iy, ix);
                gin.at(ic, iy, ix) += d * theta[wi];
              }
            }
          }
        }
      }
    }
    g = std::move(gin);
  }
  return grad;
}

}  // namespace wmil::reference

#endif  // WMIL_REFERENCE_NET_HPP_
