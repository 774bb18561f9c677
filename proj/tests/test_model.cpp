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


#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "wmil/errors.hpp"
#include "wmil/model.hpp"
#include "wmil/reference_net.hpp"

using wmil::Architecture;
using wmil::ModelParams;

namespace {

std::vector<double> random_tensor(std::mt19937_64& g, int size) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<double> t(3 * static_cast<std::size_t>(size) * size);
  for (double& v : t) v = u(g);
  return t;
}

// Random parameters with small positive biases so that fewer units sit
// exactly at the ReLU kink.
ModelParams random_params(const Architecture& arch, std::uint64_t seed) {
  ModelParams p = wmil::init_params(arch, seed);
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(0.0, 0.05);
  const wmil::ParamLayout layout(arch);
  for (const auto& c : layout.conv) {
    for (int i = 0; i < c.out; ++i) p.values[c.bias + i] = u(g);
  }
  p.values[layout.fc_bias] = 0.1;
  return p;
}

double rel(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("default layout has the expected parameter count") {
  const wmil::ParamLayout layout{Architecture{}};
  // 3*8*9+8 + 8*16*9+16 + 16*32*9+32 + 32+1
  CHECK(layout.total == 6065);
  CHECK(layout.pooled_size == 8);
  CHECK(layout.conv[2].size == 16);
}

TEST_CASE("architecture validation") {
  Architecture a;
  a.input_size = 60;
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  a.input_size = 0;
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  a = Architecture{};
  a.channels = {1, 8, 16, 32};
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
}

TEST_CASE("initialization is seeded and bounded") {
  const Architecture arch;
  const ModelParams a = wmil::init_params(arch, 5);
  CHECK(a == wmil::init_params(arch, 5));
  CHECK(a.values != wmil::init_params(arch, 6).values);
  const wmil::ParamLayout layout(arch);
  for (const auto& c : layout.conv) {
    const double s = std::sqrt(6.0 / (9.0 * c.in + 9.0 * c.out));
    for (int i = 0; i < c.out * c.in * 9; ++i) {
      CHECK(std::abs(a.values[c.weight + i]) <= s);
    }
    for (int i = 0; i < c.out; ++i) CHECK(a.values[c.bias + i] == 0.0);
  }
  CHECK(a.values[layout.fc_bias] == 0.0);
}

TEST_CASE("zero network scores one half") {
  Architecture arch;
  arch.input_size = 16;
  const ModelParams p = wmil::zero_params(arch);
  std::mt19937_64 g(1);
  const auto [out, cache] = wmil::forward(p, wmil::testing::random_image(g, 16, 16));
  CHECK(out.h == 0.0);
  CHECK(out.p_pos == 0.5);
  CHECK(out.p_neg == 0.5);
}

TEST_CASE("forward rejects wrongly shaped regions") {
  const ModelParams p = wmil::init_params(Architecture{}, 1);
  CHECK_THROWS_AS(wmil::forward(p, wmil::Image(32, 32, 3)), std::invalid_argument);
  CHECK_THROWS_AS(wmil::forward(p, wmil::Image(64, 64, 1)), std::invalid_argument);
  ModelParams short_params = p;
  short_params.values.pop_back();
  CHECK_THROWS_AS(wmil::forward(short_params, wmil::Image(64, 64, 3)),
                  std::invalid_argument);
}

TEST_CASE("forward is pure and matches the serial reference network") {
  for (int size : {8, 16, 32, 64}) {
    Architecture arch;
    arch.input_size = size;
    std::mt19937_64 g(size);
    for (int t = 0; t < 3; ++t) {
      const ModelParams p = random_params(arch, 100 + t);
      const auto x = random_tensor(g, size);
      wmil::ActivationCache cache;
      const double h1 = wmil::forward_tensor(p, x, cache).h;
      const double h2 = wmil::forward_tensor(p, x, cache).h;
      CHECK(h1 == h2);
      const double ref = wmil::reference::logit<double>(arch, p.values, x);
      CHECK(rel(h1, ref, 1e-12) < 1e-12);
    }
  }
}

TEST_CASE("image forward uses the centered tensor") {
  Architecture arch;
  arch.input_size = 8;
  const ModelParams p = random_params(arch, 3);
  std::mt19937_64 g(3);
  const wmil::Image img = wmil::testing::random_image(g, 8, 8);
  const auto x = wmil::region_tensor(img);
  REQUIRE(x.size() == 3 * 64);
  CHECK(x[0] == doctest::Approx(img.at(0, 0, 0) - 0.5));
  CHECK(x[64 + 9] == doctest::Approx(img.at(1, 1, 1) - 0.5));
  wmil::ActivationCache cache;
  CHECK(wmil::forward(p, img, cache).h == wmil::forward_tensor(p, x, cache).h);
}

TEST_CASE("backward matches the serial reference gradient") {
  for (int size : {8, 16, 32}) {
    Architecture arch;
    arch.input_size = size;
    std::mt19937_64 g(40 + size);
    const ModelParams p = random_params(arch, 7 + size);
    const auto x = random_tensor(g, size);
    wmil::ActivationCache cache;
    wmil::forward_tensor(p, x, cache);
    const auto fast = wmil::backward(p, cache, 1.0);
    const auto ref = wmil::reference::gradient(arch, p.values, x);
    REQUIRE(fast.size() == ref.size());
    double worst = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      worst = std::max(worst, rel(fast[i], ref[i], 1e-12));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("backward is linear in the upstream derivative") {
  Architecture arch;
  arch.input_size = 16;
  std::mt19937_64 g(9);
  const ModelParams p = random_params(arch, 9);
  wmil::ActivationCache cache;
  wmil::forward_tensor(p, random_tensor(g, 16), cache);
  const auto zero = wmil::backward(p, cache, 0.0);
  CHECK(std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0.0; }));
  const auto one = wmil::backward(p, cache, 0.75);
  const auto two = wmil::backward(p, cache, 1.5);
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(two[i] == 2.0 * one[i]);

  std::vector<double> acc(one.size(), 0.0);
  wmil::backward_accumulate(p, cache, 0.75, acc);
  wmil::backward_accumulate(p, cache, 0.75, acc);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(acc[i] == doctest::Approx(two[i]).epsilon(1e-14));
  }
}

TEST_CASE("backward refuses a cache from other parameters") {
  Architecture arch;
  arch.input_size = 8;
  std::mt19937_64 g(2);
  ModelParams p = random_params(arch, 2);
  wmil::ActivationCache cache;
  CHECK_THROWS_AS(wmil::backward(p, cache, 1.0), std::logic_error);
  wmil::forward_tensor(p, random_tensor(g, 8), cache);
  CHECK_NOTHROW(wmil::backward(p, cache, 1.0));
  p.values[3] += 1e-9;
  CHECK_THROWS_AS(wmil::backward(p, cache, 1.0), std::logic_error);
  Architecture other;
  other.input_size = 16;
  CHECK_THROWS_AS(wmil::backward(wmil::zero_params(other), cache, 1.0),
                  std::logic_error);
}

TEST_CASE("parameter gradients agree with central differences") {
  // Away from ReLU and max-pool switches the logit is affine in any single
  // parameter, so the central difference is exact up to rounding; long
  // double evaluation keeps that rounding well below the tolerance.
  Architecture arch;
  arch.input_size = 8;
  const double eps = 1e-5;
  int compared = 0;
  double worst = 0;
  for (int trial = 0; trial < 4; ++trial) {
    std::mt19937_64 g(500 + trial);
    const ModelParams p = random_params(arch, 500 + trial);
    const auto x = random_tensor(g, 8);
    wmil::ActivationCache cache;
    wmil::forward_tensor(p, x, cache);
    const auto grad = wmil::backward(p, cache, 1.0);

    std::vector<long double> theta(p.values.begin(), p.values.end());
    const std::vector<long double> xl(x.begin(), x.end());
    wmil::reference::Pattern base;
    wmil::reference::logit<long double>(arch, theta, xl, &base);
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const long double saved = theta[j];
      wmil::reference::Pattern up_pat, down_pat;
      theta[j] = saved + eps;
      const long double up = wmil::reference::logit<long double>(arch, theta, xl, &up_pat);
      theta[j] = saved - eps;
      const long double down = wmil::reference::logit<long double>(arch, theta, xl, &down_pat);
      theta[j] = saved;
      if (up_pat != base || down_pat != base) continue;
      const double numeric = static_cast<double>((up - down) / (2 * eps));
      worst = std::max(worst, rel(grad[j], numeric, 1e-8));
      ++compared;
    }
  }
  CHECK(compared > 4 * 5000);
  CHECK(worst < 1e-5);
}

TEST_CASE("checkpoint round trip is bit exact") {
  wmil::testing::TempDir dir("model");
  const ModelParams p = random_params(Architecture{}, 77);
  wmil::save_params(p, dir / "p.ckpt");
  CHECK(wmil::load_params(dir / "p.ckpt") == p);

  wmil::Checkpoint ck{p, wmil::OptimizerState{4, std::vector<double>(p.values.size(), -0.125)}};
  wmil::save_checkpoint(ck, dir / "s.ckpt");
  const wmil::Checkpoint back = wmil::load_checkpoint(dir / "s.ckpt");
  CHECK(back.params == p);
  REQUIRE(back.state.has_value());
  CHECK(*back.state == *ck.state);
  // Saving again reproduces the same bytes.
  wmil::save_checkpoint(back, dir / "t.ckpt");
  CHECK(slurp(dir / "s.ckpt") == slurp(dir / "t.ckpt"));
}

TEST_CASE("checkpoint header carries magic, version and architecture") {
  wmil::testing::TempDir dir("model");
  Architecture arch;
  arch.input_size = 32;
  ModelParams p = wmil::init_params(arch, 0xabcdef);
  wmil::save_params(p, dir / "p.ckpt");
  const std::string bytes = slurp(dir / "p.ckpt");
  CHECK(bytes.substr(0, 8) == "WMILCKPT");
  CHECK(static_cast<unsigned char>(bytes[8]) == wmil::kCheckpointVersion);
  CHECK(static_cast<unsigned char>(bytes[12]) == 32);
  CHECK(bytes.size() == 8 + 4 + 4 + 4 + 16 + 8 + 8 + 8 * p.values.size() + 1);
  CHECK(wmil::load_params(dir / "p.ckpt").seed == 0xabcdef);
}

TEST_CASE("corrupt checkpoints raise data errors") {
  wmil::testing::TempDir dir("model");
  Architecture arch;
  arch.input_size = 16;
  wmil::save_params(wmil::init_params(arch, 1), dir / "p.ckpt");
  const std::string good = slurp(dir / "p.ckpt");

  std::string bad = good;
  bad[8] = 2;  // future version
  spit(dir / "v.ckpt", bad);
  CHECK_THROWS_AS(wmil::load_params(dir / "v.ckpt"), wmil::DataError);

  bad = good;
  bad[0] = 'X';
  spit(dir / "m.ckpt", bad);
  CHECK_THROWS_AS(wmil::load_params(dir / "m.ckpt"), wmil::DataError);

  spit(dir / "t.ckpt", good.substr(0, good.size() - 20));
  CHECK_THROWS_AS(wmil::load_params(dir / "t.ckpt"), wmil::DataError);

  spit(dir / "x.ckpt", good + "junk");
  CHECK_THROWS_AS(wmil::load_params(dir / "x.ckpt"), wmil::DataError);

  bad = good;
  bad[12] = 17;  // input size that is not a multiple of 8
  spit(dir / "a.ckpt", bad);
  CHECK_THROWS_AS(wmil::load_params(dir / "a.ckpt"), wmil::DataError);

  CHECK_THROWS_AS(wmil::load_params(dir / "missing.ckpt"), wmil::DataError);
}

}  // TEST_SUITE
