// Copyright 2026 The srstereo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <cmath>

#include "srstereo/core_math.hpp"
#include "test_util.hpp"

using namespace srstereo;
using namespace srstereo::testing;

TEST_CASE("clip bounds") {
  const ClipBound m(2.0);
  CHECK(m.quarter_limit() == 3.0);
  CHECK(m.full_limit() == 12.0);
  CHECK_THROWS_AS(ClipBound(0.0), ContractError);
  CHECK(clip_symmetric(5.0, 3.0) == 3.0);
  CHECK(clip_symmetric(-5.0, 3.0) == -3.0);
  CHECK(clip_symmetric(1.25, 3.0) == 1.25);
  CHECK_THROWS_AS(clip_symmetric(1.0, 0.0), ContractError);
}

TEST_CASE("clip is the identity inside the bound and saturates outside") {
  Rng rng(1);
  std::uniform_real_distribution<double> u(-50.0, 50.0), b(0.01, 20.0);
  for (int i = 0; i < 20000; ++i) {
    const double x = u(rng), bound = b(rng);
    const double c = clip_symmetric(x, bound);
    CHECK(std::abs(c) <= bound);
    if (std::abs(x) <= bound) CHECK(c == x);
    else CHECK(c == std::copysign(bound, x));
  }
}

TEST_CASE("balanced weight") {
  CHECK(balanced_weight(4.0, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(balanced_weight(0.25, 0.5) == 1.5);  // 2 capped
  CHECK(balanced_weight(0.0, 0.5) == 1.5);
  CHECK(balanced_weight(0.0, 0.0) == 1.0);
  CHECK(balanced_weight(-9.0, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(balanced_weight(1.0, -0.1), ContractError);
}

TEST_CASE("clip-balanced losses") {
  CHECK(cb_l1(4.0, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(cb_smooth_l1(4.0, 0.5) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(cb_smooth_l1(0.5, 0.5) == doctest::Approx(std::sqrt(2.0) * 0.125).epsilon(1e-15));
  CHECK(cb_smooth_l1(0.1, 0.5) == doctest::Approx(1.5 * 0.005).epsilon(1e-15));
  CHECK(cb_l1(0.0, 0.5) == 0.0);
}

TEST_CASE("h = 0 gives the plain losses") {
  Rng rng(2);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng), a = std::abs(x);
    CHECK(cb_l1(x, 0.0) == a);
    CHECK(cb_smooth_l1(x, 0.0) == (a < 1.0 ? 0.5 * x * x : a - 0.5));
  }
}

TEST_CASE("loss derivatives match central differences away from kinks") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-6.0, 6.0), hs(0.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 5000; ++i) {
    const double x = u(rng), h = hs(rng), a = std::abs(x);
    // Skip the cap corner |x| = 1.5^(-1/h), the Smooth-L1 knee and zero.
    const double corner = h > 0 ? std::pow(1.5, -1.0 / h) : -1.0;
    if (std::abs(a - corner) < 1e-3 || std::abs(a - 1.0) < 1e-3 || a < 1e-3) continue;
    const double e = 1e-6;
    const double n1 = (cb_l1(x + e, h) - cb_l1(x - e, h)) / (2 * e);
    const double n2 = (cb_smooth_l1(x + e, h) - cb_smooth_l1(x - e, h)) / (2 * e);
    CHECK(cb_l1_grad(x, h) == doctest::Approx(n1).epsilon(1e-6));
    CHECK(cb_smooth_l1_grad(x, h) == doctest::Approx(n2).epsilon(1e-6));
    ++checked;
  }
  CHECK(checked > 4000);
}

TEST_CASE("tensor overloads agree with the scalar forms") {
  Rng rng(4);
  const Tensor x = uniform(2, 3, 4, -5.0, 5.0, rng);
  const Tensor c = clip_symmetric(x, 1.5), w = balanced_weight(x, 0.5), l1 = cb_l1(x, 0.5), sl = cb_smooth_l1(x, 0.5);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(c[i] == clip_symmetric(x[i], 1.5));
    CHECK(w[i] == balanced_weight(x[i], 0.5));
    CHECK(l1[i] == cb_l1(x[i], 0.5));
    CHECK(sl[i] == cb_smooth_l1(x[i], 0.5));
  }
}

TEST_CASE("prewitt magnitude of a vertical step") {
  Tensor f(1, 5, 6, 0.0);
  for (int y = 0; y < 5; ++y)
    for (int x = 3; x < 6; ++x) f.at(0, y, x) = 2.0;
  const Tensor g = prewitt_magnitude(f);
  for (int y = 0; y < 5; ++y) {
    CHECK(g.at(0, y, 1) == 0.0);
    CHECK(g.at(0, y, 2) == 6.0);  // three rows of (2 - 0)
    CHECK(g.at(0, y, 3) == 6.0);
    CHECK(g.at(0, y, 4) == 0.0);
  }
  const auto [gx, gy] = prewitt_responses(f);
  CHECK(gx.at(0, 0, 2) == 6.0);
  CHECK(gy.at(0, 0, 2) == 0.0);
  CHECK_THROWS_AS(prewitt_magnitude(Tensor(1, 2, 5)), ContractError);
}

TEST_CASE("prewitt of a linear ramp is constant inside") {
  Tensor f(1, 6, 7);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 7; ++x) f.at(0, y, x) = 0.5 * x + 2.0 * y;
  const Tensor g = prewitt_magnitude(f);
  const double expect = std::hypot(3.0 * 2 * 0.5, 3.0 * 2 * 2.0);
  for (int y = 1; y < 5; ++y)
    for (int x = 1; x < 6; ++x) CHECK(g.at(0, y, x) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("resize") {
  CHECK(resized_extent(64, 0.25) == 16);
  CHECK(resized_extent(66, 0.25) == 16);
  CHECK_THROWS_AS(resized_extent(3, 0.25), ContractError);

  // Half-pixel centres: output j samples input coordinate 4j + 1.5.
  Tensor ramp(1, 8, 16);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 16; ++x) ramp.at(0, y, x) = x;
  const Tensor r = resize_bilinear(ramp, 2, 4);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 4; ++x) CHECK(r.at(0, y, x) == doctest::Approx(4.0 * x + 1.5).epsilon(1e-15));

  Rng rng(5);
  const Tensor c(3, 5, 7, 0.37);
  const Tensor rc = resize_bilinear(c, 11, 3);
  for (std::size_t i = 0; i < rc.size(); ++i) CHECK(rc[i] == doctest::Approx(0.37).epsilon(1e-15));

  // Masks resize by nearest neighbour.
  ScalarField s(8, 8, 1.0, true);
  s.valid.set(6, 2, false);  // sampled by output (1, 0)
  const ScalarField q = resize_bilinear(s, 0.25);
  CHECK(q.height() == 2);
  CHECK(q.valid.count() == 3);
}
