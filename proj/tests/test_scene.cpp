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

#include <set>

#include "srstereo/scene.hpp"
#include "test_util.hpp"

using namespace srstereo;
using namespace srstereo::testing;

TEST_CASE("generation is deterministic in the spec") {
  SceneSpec s;
  s.seed = 42;
  const StereoSample a = generate_scene(s), b = generate_scene(s);
  CHECK(a.left == b.left);
  CHECK(a.right == b.right);
  CHECK(a.disparity_gt.values == b.disparity_gt.values);
  s.seed = 43;
  CHECK(!(generate_scene(s).left == a.left));
}

TEST_CASE("non-occluded pixels match across views exactly without noise") {
  Rng rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    SceneSpec s;
    s.seed = rng();
    s.noise_sigma = 0.0;
    s.num_layers = 1 + trial % 4;
    const StereoSample smp = generate_scene(s);
    std::size_t checked = 0;
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) {
        const double d = smp.disparity_gt.at(y, x);
        CHECK(d >= s.d_min);
        CHECK(d <= s.d_max);
        CHECK(d == std::floor(d));
        if (smp.occlusion.at(y, x)) continue;
        const int xr = x - static_cast<int>(d);
        REQUIRE(xr >= 0);
        for (int c = 0; c < 3; ++c) CHECK(smp.left.at(c, y, x) == smp.right.at(c, y, xr));
        ++checked;
      }
    CHECK(checked > 0);
  }
}

TEST_CASE("layer disparities and occlusion") {
  SceneSpec s;
  s.seed = 7;
  s.num_layers = 4;
  const StereoSample smp = generate_scene(s);
  REQUIRE(smp.layer_disparities.size() == 4);
  for (int i = 1; i < 4; ++i) CHECK(smp.layer_disparities[i - 1] <= smp.layer_disparities[i]);
  std::set<double> seen(smp.disparity_gt.values.span().begin(), smp.disparity_gt.values.span().end());
  for (double d : seen) CHECK(std::count(smp.layer_disparities.begin(), smp.layer_disparities.end(), d) > 0);
  // Left-border pixels whose match falls outside the right frame are occluded.
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x)
      if (x - static_cast<int>(smp.disparity_gt.at(y, x)) < 0) CHECK(smp.occlusion.at(y, x));
}

TEST_CASE("explicit shapes and contract checks") {
  SceneSpec s;
  s.num_layers = 2;
  s.d_min = 20.0;
  s.d_max = 20.0;
  s.shapes = {{ShapeKind::kRectangle, 10, 10, 30, 30}};
  const StereoSample smp = generate_scene(s);
  CHECK(smp.disparity_gt.at(15, 15) == 20.0);

  SceneSpec bad;
  bad.d_max = 48.0;  // width 96
  CHECK_THROWS_AS(generate_scene(bad), ContractError);
  bad = SceneSpec{};
  bad.d_min = 0.2;
  bad.d_max = 0.8;
  CHECK_THROWS_AS(generate_scene(bad), ContractError);
  bad = SceneSpec{};
  bad.num_layers = 2;
  bad.shapes = {{ShapeKind::kEllipse, 90, 10, 100, 20}};
  CHECK_THROWS_AS(generate_scene(bad), ContractError);
  bad = SceneSpec{};
  bad.texture.noise_amplitude = 1.5;
  CHECK_THROWS_AS(generate_scene(bad), ContractError);
}

TEST_CASE("sparsification erases edges and thins the rest") {
  SceneSpec s;
  s.seed = 9;
  const StereoSample smp = generate_scene(s);
  Tensor edge(1, s.height, s.width, 0.0);
  for (int y = 0; y < s.height; ++y) edge.at(0, y, 40) = 1.0;
  const DisparityMap sp = sparsify_gt(smp.disparity_gt, edge, 0.5, 3);
  for (int y = 0; y < s.height; ++y) CHECK(!sp.valid.at(y, 40));
  const double kept = static_cast<double>(sp.valid.count()) / (s.height * (s.width - 1));
  CHECK(kept == doctest::Approx(0.5).epsilon(0.05));
  CHECK(sparsify_gt(smp.disparity_gt, edge, 0.5, 3).valid == sp.valid);
  CHECK(sparsify_gt(smp.disparity_gt, edge, 0.0, 3).valid.count() == static_cast<std::size_t>(s.height * (s.width - 1)));
  CHECK_THROWS_AS(sparsify_gt(smp.disparity_gt, edge, 1.5, 3), ContractError);
}

TEST_CASE("domain suites and per-sample seeds") {
  SceneSpec base;
  base.seed = 5;
  const auto suite = make_domain_suite(base, {{0.0, 24.0}, {10.0, 40.0}});
  REQUIRE(suite.size() == 2);
  CHECK(suite[1].d_min == 10.0);
  CHECK(suite[0].seed != suite[1].seed);
  CHECK(sample_spec(base, 0).seed != sample_spec(base, 1).seed);
  CHECK(sample_spec(base, 3).seed == sample_spec(base, 3).seed);
}
