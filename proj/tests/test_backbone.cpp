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

#include "srstereo/backbone.hpp"
#include "test_util.hpp"

using namespace srstereo;
using namespace srstereo::testing;

TEST_CASE("disparity levels cover the full-resolution range") {
  CHECK(disparity_levels(24.0) == 7);
  CHECK(disparity_levels(48.0) == 13);
  CHECK(disparity_levels(25.0) == 8);
  CHECK_THROWS_AS(disparity_levels(0.0), ContractError);
}

TEST_CASE("feature encoder works at quarter resolution") {
  Rng rng(21);
  ParameterStore store;
  FeatureEncoder enc(store, "fnet", 3, 12, rng);
  const ag::Var f = enc(ag::constant(uniform(3, 64, 96, 0.0, 1.0, rng)));
  CHECK(f.value().channels() == 12);
  CHECK(f.value().height() == 16);
  CHECK(f.value().width() == 24);

  // Receptive field of the stack, grown layer by layer.
  int rf = 1, jump = 1;
  for (const auto& l : FeatureEncoder::layer_stack()) {
    rf += (l.kernel - 1) * jump;
    jump *= l.stride;
  }
  CHECK(jump == 4);
  CHECK(rf == 23);
}

TEST_CASE("cost volume peaks at the true shift") {
  Rng rng(22);
  const int shift = 2;
  const Tensor fl = normal(8, 3, 12, 1.0, rng);
  Tensor fr(8, 3, 12);
  // Right features are the left ones moved left by `shift`.
  for (int c = 0; c < 8; ++c)
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 12; ++x) fr.at(c, y, x) = fl.at(c, y, std::min(x + shift, 11));
  const CostVolume v = build_cost_volume(ag::constant(fl), ag::constant(fr), 5);
  CHECK(v.levels() == 5);
  CHECK(v.pooled.value().channels() == 2);
  for (int y = 0; y < 3; ++y)
    for (int x = shift; x < 12; ++x) {
      // eps in the normaliser keeps a perfect match a few 1e-6 below 1.
      CHECK(v.cost.value().at(shift, y, x) == doctest::Approx(1.0).epsilon(1e-5));
      for (int d = 0; d < 5; ++d) CHECK(v.cost.value().at(d, y, x) <= v.cost.value().at(shift, y, x) + 1e-12);
    }
  for (int l = 0; l < 2; ++l)
    CHECK(v.pooled.value().at(l, 1, 7) ==
          doctest::Approx(0.5 * (v.cost.value().at(2 * l, 1, 7) + v.cost.value().at(2 * l + 1, 1, 7))));
  CHECK_THROWS_AS(build_cost_volume(ag::constant(fl), ag::constant(fr), 13), ContractError);
}

TEST_CASE("lookup at an integer disparity reads the volume") {
  Rng rng(23);
  CostVolume v;
  v.cost = ag::constant(normal(10, 2, 3, 1.0, rng));
  v.pooled = ag::constant(normal(5, 2, 3, 1.0, rng));
  const ag::Var f = lookup(v, ag::constant(Tensor(1, 2, 3, 4.0)));
  CHECK(f.value().channels() == kLookupChannels);
  const int taps = 2 * kLookupRadius + 1;
  for (int r = -kLookupRadius; r <= kLookupRadius; ++r) {
    const int lvl0 = std::clamp(4 + r, 0, 9), lvl1 = std::clamp(2 + r, 0, 4);
    CHECK(f.value().at(r + kLookupRadius, 1, 2) == v.cost.value().at(lvl0, 1, 2));
    CHECK(f.value().at(taps + r + kLookupRadius, 0, 1) == v.pooled.value().at(lvl1, 0, 1));
  }
  // Half-way between levels 4 and 5.
  const ag::Var h = lookup(v, ag::constant(Tensor(1, 2, 3, 4.5)));
  CHECK(h.value().at(kLookupRadius, 0, 0) ==
        doctest::Approx(0.5 * (v.cost.value().at(4, 0, 0) + v.cost.value().at(5, 0, 0))));
}

TEST_CASE("initial disparity is the soft argmax of the cost") {
  Tensor cost(7, 1, 2, 0.0);
  cost.at(5, 0, 0) = 1.0;
  cost.at(1, 0, 1) = 1.0;
  CostVolume v;
  v.cost = ag::constant(cost);
  v.pooled = ag::constant(Tensor(3, 1, 2));
  const ag::Var d = initial_disparity(v, 0.02);
  CHECK(d.value()[0] == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(d.value()[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("upsampler") {
  Rng rng(24);
  ParameterStore store;
  const DisparityUpsampler bil(store, "bil", UpsampleMode::kBilinear, 16, rng);
  CHECK(store.size() == 0);
  const ag::Var f = ag::constant(normal(16, 3, 4, 1.0, rng));
  const ag::Var u = bil(ag::constant(Tensor(1, 3, 4, 2.0)), f);
  CHECK(u.value().height() == 12);
  CHECK(u.value().at(0, 5, 7) == doctest::Approx(8.0));

  const DisparityUpsampler cvx(store, "cvx", UpsampleMode::kConvex, 16, rng);
  CHECK(store.size() > 0);
  CHECK_THROWS_AS(bil.mask_logits(f), ContractError);
  // Zero-initialised logits: constant input stays constant (times 4).
  const ag::Var c = cvx(ag::constant(Tensor(1, 3, 4, 1.5)), f);
  for (std::size_t i = 0; i < c.value().size(); ++i) CHECK(c.value()[i] == doctest::Approx(6.0));
}

TEST_CASE("padding replicates the last row and column") {
  Rng rng(25);
  const Image img = uniform(3, 5, 6, 0.0, 1.0, rng);
  const Image p = pad_to_multiple(img, 4);
  CHECK(p.height() == 8);
  CHECK(p.width() == 8);
  CHECK(p.at(1, 7, 7) == img.at(1, 4, 5));
  CHECK(p.at(2, 2, 6) == img.at(2, 2, 5));
  CHECK(pad_to_multiple(Image(3, 8, 12), 4).same_shape(Image(3, 8, 12)));
}
