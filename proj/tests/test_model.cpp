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

#include "srstereo/model.hpp"
#include "srstereo/scene.hpp"
#include "srstereo/train.hpp"
#include "test_util.hpp"

using namespace srstereo;
using namespace srstereo::testing;

namespace {

TrainingSample small_sample(std::uint64_t seed, int h = 32, int w = 48, double d_max = 12.0) {
  SceneSpec s;
  s.seed = seed;
  s.height = h;
  s.width = w;
  s.d_max = d_max;
  return make_training_sample(generate_scene(s), d_max, "s", "main");
}

}  // namespace

TEST_CASE("forward shapes and step count") {
  ModelConfig c;
  c.num_gru = 2;
  c.num_sru = 3;
  const StereoModel m(c);
  const TrainingSample s = small_sample(1, 30, 46);  // not a multiple of four
  const StereoPrediction p = m.forward(s.left, s.right, s.levels);
  CHECK(p.steps.size() == 5);
  CHECK(p.steps[0].kind == UnitKind::kGruResidual);
  CHECK(p.steps[4].kind == UnitKind::kStepwise);
  CHECK(p.d_init.value().height() == 8);
  CHECK(p.d_init_full.value().height() == 30);
  CHECK(p.final_full().value().width() == 46);
  CHECK(m.predict(s.left, s.right, s.levels).values == p.final_full().value());
}

TEST_CASE("initialisation is seeded") {
  ModelConfig c;
  const StereoModel a(c), b(c);
  CHECK(a.parameters().values_equal(b.parameters()));
  c.init_seed = 2;
  const StereoModel d(c);
  CHECK(!a.parameters().values_equal(d.parameters()));
  ModelConfig cv = c;
  cv.upsample = UpsampleMode::kConvex;
  CHECK(StereoModel(cv).parameters().size() > d.parameters().size());
  ModelConfig gru = c;
  gru.num_gru = 1;
  // The residual unit shares the recurrent core, so no new parameters.
  CHECK(StereoModel(gru).parameters().scalar_count() == d.parameters().scalar_count());
}

TEST_CASE("invalid schedules are rejected") {
  ModelConfig c;
  c.num_sru = 0;
  c.num_gru = 0;
  CHECK_THROWS_AS(StereoModel{c}, ContractError);
  c.num_sru = 1;
  c.m = -1.0;
  CHECK_THROWS_AS(StereoModel{c}, ContractError);
}

TEST_CASE("zero-initialised heads: first loss is the init loss plus the full-resolution terms") {
  const StereoModel m(ModelConfig{});
  const TrainingSample s = small_sample(4);
  const SampleLoss sl = stereo_loss(m, s, LossConfig{});
  const StereoPrediction& p = sl.prediction;
  for (const auto& st : p.steps) CHECK(st.d_quarter.value() == p.d_init.value());

  // Independent recomputation: every step sees the same previous disparity,
  // so its targets are those of the initial disparity.
  const double mval = 2.0, h = 0.5;
  const auto w = step_weights(15, 0.9);
  double wsum = 0.0;
  for (double v : w) wsum += v;
  const ScalarField qgt = quarter_ground_truth(s.gt, p.d_init.value().height(), p.d_init.value().width());
  double init = 0.0, delta = 0.0, full = 0.0;
  std::size_t n = 0, nq = 0;
  for (std::size_t i = 0; i < s.gt.values.size(); ++i) {
    const double e = p.d_init_full.value()[i] - s.gt.values[i], a = std::abs(e);
    init += a < 1.0 ? 0.5 * e * e : a - 0.5;
    const double prev = p.d_init_full.value()[i];
    const double target = prev + std::clamp(s.gt.values[i] - prev, -6 * mval, 6 * mval);
    full += cb_l1(p.steps[0].d_full.value()[i] - target, h);
    ++n;
  }
  for (std::size_t i = 0; i < qgt.values.size(); ++i) {
    if (!qgt.valid[i]) continue;
    const double t = std::clamp(qgt.values[i] - p.d_init.value()[i], -1.5 * mval, 1.5 * mval);
    delta += cb_smooth_l1(0.0 - t, h);
    ++nq;
  }
  const double expect = init / n + wsum * (delta / nq + full / n);
  CHECK(sl.loss.total.item() == doctest::Approx(expect).epsilon(1e-12));
  CHECK(sl.loss.init == doctest::Approx(init / n).epsilon(1e-12));
}

TEST_CASE("no-grad guard restores trainability") {
  StereoModel m(ModelConfig{});
  const bool before = m.parameters().entries().front().var.requires_grad();
  {
    NoGradGuard g(m.parameters());
    CHECK(!m.parameters().entries().front().var.requires_grad());
  }
  CHECK(m.parameters().entries().front().var.requires_grad() == before);
}
