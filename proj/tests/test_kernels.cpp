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


#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "wmil/conv_kernels.hpp"

namespace k = wmil::kernels;

namespace {

std::vector<double> randoms(std::mt19937_64& g, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(g);
  return v;
}

std::size_t idx(int c, int y, int x, int size) {
  return (static_cast<std::size_t>(c) * size + y) * size + x;
}

// Zero-padded reads from an unpadded map.
double at(const std::vector<double>& m, int c, int y, int x, int size) {
  if (y < 0 || x < 0 || y >= size || x >= size) return 0.0;
  return m[idx(c, y, x, size)];
}

std::vector<double> padded(const std::vector<double>& m, int ch, int size) {
  std::vector<double> out(static_cast<std::size_t>(ch) * (size + 2) * (size + 2));
  k::pad_map(m, ch, size, out);
  return out;
}

struct Shape {
  int cin, cout, size;
};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("pad_map surrounds each channel with zeros") {
  const std::vector<double> m{1, 2, 3, 4, 5, 6, 7, 8};
  const auto p = padded(m, 2, 2);
  REQUIRE(p.size() == 32);
  const std::vector<double> first{0, 0, 0, 0, 0, 1, 2, 0, 0, 3, 4, 0, 0, 0, 0, 0};
  CHECK(std::vector<double>(p.begin(), p.begin() + 16) == first);
  CHECK(p[16 + 5] == 5);
  CHECK(p[16 + 10] == 8);
}

TEST_CASE("convolution kernels match direct loops") {
  std::mt19937_64 g(1);
  for (const Shape s : {Shape{3, 8, 32}, Shape{8, 16, 16}, Shape{16, 32, 8},
                        Shape{2, 3, 1}, Shape{5, 7, 6}}) {
    CAPTURE(s.cin);
    CAPTURE(s.size);
    const auto in = randoms(g, static_cast<std::size_t>(s.cin) * s.size * s.size);
    const auto w = randoms(g, static_cast<std::size_t>(s.cout) * s.cin * 9);
    const auto b = randoms(g, s.cout);
    const auto dz = randoms(g, static_cast<std::size_t>(s.cout) * s.size * s.size);

    std::vector<double> out(dz.size());
    k::conv3x3_forward(padded(in, s.cin, s.size), s.cin, s.size, w, b, s.cout, out);
    std::vector<double> gw(w.size(), 0.5), gb(b.size(), -0.5);
    k::conv3x3_backward_params(padded(in, s.cin, s.size), s.cin, s.size, dz,
                               s.cout, gw, gb);
    std::vector<double> gin(in.size());
    k::conv3x3_backward_input(padded(dz, s.cout, s.size), s.cout, s.size, w,
                              s.cin, gin);

    std::vector<double> ref_out(out.size()), ref_gw(w.size(), 0.5),
        ref_gb(b.size(), -0.5), ref_gin(in.size(), 0.0);
    for (int oc = 0; oc < s.cout; ++oc) {
      for (int y = 0; y < s.size; ++y) {
        for (int x = 0; x < s.size; ++x) {
          double acc = b[oc];
          const double d = dz[idx(oc, y, x, s.size)];
          ref_gb[oc] += d;
          for (int ic = 0; ic < s.cin; ++ic) {
            for (int t = 0; t < 9; ++t) {
              const int iy = y + t / 3 - 1, ix = x + t % 3 - 1;
              const std::size_t wi = (static_cast<std::size_t>(oc) * s.cin + ic) * 9 + t;
              acc += w[wi] * at(in, ic, iy, ix, s.size);
              ref_gw[wi] += d * at(in, ic, iy, ix, s.size);
              if (iy >= 0 && ix >= 0 && iy < s.size && ix < s.size) {
                ref_gin[idx(ic, iy, ix, s.size)] += d * w[wi];
              }
            }
          }
          ref_out[idx(oc, y, x, s.size)] = acc;
        }
      }
    }
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(ref_out[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < gw.size(); ++i) CHECK(gw[i] == doctest::Approx(ref_gw[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < gb.size(); ++i) CHECK(gb[i] == doctest::Approx(ref_gb[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < gin.size(); ++i) CHECK(gin[i] == doctest::Approx(ref_gin[i]).epsilon(1e-12));
  }
}

TEST_CASE("empty bias means no bias") {
  std::mt19937_64 g(2);
  const auto in = randoms(g, 2 * 16);
  const auto w = randoms(g, 3 * 2 * 9);
  std::vector<double> with(3 * 16), without(3 * 16);
  const std::vector<double> zeros(3, 0.0);
  k::conv3x3_forward(padded(in, 2, 4), 2, 4, w, zeros, 3, with);
  k::conv3x3_forward(padded(in, 2, 4), 2, 4, w, {}, 3, without);
  CHECK(with == without);
}

TEST_CASE("relu max-pool forward and backward route through the winner") {
  // One channel, 4x4 map, four 2x2 windows.
  const std::vector<double> pre{
      1, 3,   -1, -2,
      2, 0,   -3, -4,
      0, 0,   5, 5,
      0, 0,   5, 4};
  std::vector<double> pooled(4);
  std::vector<std::uint8_t> arg(4);
  k::relu_maxpool_forward(pre, 1, 4, pooled, false, arg);
  CHECK(pooled == std::vector<double>{3, 0, 0, 5});
  CHECK(arg[0] == 1);
  CHECK(arg[3] == 0);  // ties go to the first tap

  std::vector<double> grad_pre(16, 7.0);
  const std::vector<double> up{10, 20, 30, 40};
  k::relu_maxpool_backward(up, pooled, false, arg, 1, 4, grad_pre);
  std::vector<double> expect(16, 0.0);
  expect[1] = 10;   // winner of the first window
  expect[10] = 40;  // first tap of the tied window
  CHECK(grad_pre == expect);

  std::vector<double> pooled_pad(16);
  k::relu_maxpool_forward(pre, 1, 4, pooled_pad, true, arg);
  CHECK(pooled_pad[5] == 3);
  CHECK(pooled_pad[10] == 5);
  CHECK(pooled_pad[0] == 0);
}

}  // TEST_SUITE
