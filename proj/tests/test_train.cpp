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
#include <numbers>

#include "srstereo/train.hpp"
#include "test_util.hpp"

using namespace srstereo;
using namespace srstereo::testing;

namespace {

std::vector<TrainingSample> small_data(int n, std::uint64_t seed) {
  SceneSpec base;
  base.seed = seed;
  base.height = 32;
  base.width = 48;
  base.d_max = 12.0;
  std::vector<TrainingSample> out;
  for (int i = 0; i < n; ++i)
    out.push_back(make_training_sample(generate_scene(sample_spec(base, i)), base.d_max, "s" + std::to_string(i), "m"));
  return out;
}

ModelConfig small_model() {
  ModelConfig c;
  c.feature_channels = 8;
  c.context_channels = 8;
  c.hidden_channels = 8;
  c.num_sru = 3;
  return c;
}

LossConfig small_loss() {
  LossConfig l;
  l.iterations = 3;
  return l;
}

}  // namespace

TEST_CASE("one-cycle schedule: warmup, peak, cosine floor") {
  const OneCycleSchedule s(1.0, 100);
  CHECK(s.at(0) == doctest::Approx(0.04));
  CHECK(s.at(5) == doctest::Approx(0.04 + 0.96 * 0.5));
  CHECK(s.at(10) == doctest::Approx(1.0));
  CHECK(s.at(55) == doctest::Approx(0.04 + 0.48 * (1.0 + std::cos(std::numbers::pi * 0.5))));
  CHECK(s.at(100) == doctest::Approx(0.04));
  CHECK_THROWS_AS(OneCycleSchedule(0.0, 10), ContractError);
}

TEST_CASE("AdamW matches a hand-rolled update") {
  ParameterStore store;
  Tensor init(1, 1, 3);
  init[0] = 1.0, init[1] = -2.0, init[2] = 0.5;
  ag::Var p = store.add("p", init);
  AdamWConfig cfg;
  cfg.clip_norm = 0.0;
  cfg.weight_decay = 0.01;
  AdamW opt(store, cfg);
  double m[3] = {0, 0, 0}, v[3] = {0, 0, 0}, x[3] = {1.0, -2.0, 0.5};
  Tensor w(1, 1, 3);
  w[0] = 3.0, w[1] = -1.0, w[2] = 0.25;
  for (int t = 1; t <= 5; ++t) {
    store.zero_grad();
    // loss = sum(w * p^2), so grad = 2 w p
    ag::backward(ag::weighted_sum(ag::mul(p, p), w));
    opt.step(0.1);
    for (int i = 0; i < 3; ++i) {
      const double g = 2.0 * w[i] * x[i];
      m[i] = 0.9 * m[i] + 0.1 * g;
      v[i] = 0.999 * v[i] + 0.001 * g * g;
      x[i] -= 0.1 * 0.01 * x[i];
      x[i] -= 0.1 * (m[i] / (1 - std::pow(0.9, t))) / (std::sqrt(v[i] / (1 - std::pow(0.999, t))) + 1e-8);
    }
    for (int i = 0; i < 3; ++i) CHECK(p.value()[i] == doctest::Approx(x[i]).epsilon(1e-12));
  }
}

TEST_CASE("AdamW clips the global gradient norm") {
  ParameterStore store;
  ag::Var p = store.add("p", Tensor(1, 1, 2));
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  AdamW opt(store, cfg);
  Tensor w(1, 1, 2);
  w[0] = 30.0, w[1] = 40.0;
  ag::backward(ag::weighted_sum(p, w));
  CHECK(opt.step(1e-3) == doctest::Approx(50.0));
  // The first step moves each coordinate by lr regardless of scale.
  CHECK(p.value()[0] == doctest::Approx(-1e-3));
  CHECK(p.value()[1] == doctest::Approx(-1e-3));
}

TEST_CASE("sample order is seeded and in range") {
  const auto a = sample_order(7, 100, 3), b = sample_order(7, 100, 3), c = sample_order(7, 100, 4);
  CHECK(a == b);
  CHECK(a != c);
  for (auto i : a) CHECK(i < 7);
  CHECK_THROWS_AS(sample_order(0, 1, 1), ContractError);
}

TEST_CASE("training is deterministic and lowers the loss") {
  const auto data = small_data(2, 21);
  OptimConfig o;
  o.steps = 40;
  o.learning_rate = 4e-3;
  StereoModel a(small_model()), b(small_model());
  const auto la = train_stereo(a, data, o, small_loss());
  const auto lb = train_stereo(b, data, o, small_loss());
  CHECK(a.parameters().values_equal(b.parameters()));
  REQUIRE(la.size() == 40);
  for (std::size_t i = 0; i < la.size(); ++i) CHECK(la[i].total == lb[i].total);
  double head = 0, tail = 0;
  for (int i = 0; i < 8; ++i) head += la[i].total, tail += la[la.size() - 1 - i].total;
  CHECK(tail < head);

  const auto clone = clone_model(a);
  CHECK(clone->parameters().values_equal(a.parameters()));
  CHECK(&clone->parameters() != &a.parameters());

  const std::string csv = training_csv(la);
  CHECK(csv.rfind("step,lr,loss_init,loss_delta,loss_full,loss_edge,total,epe_train,clip_saturation\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);

  o.batch = 0;
  CHECK_THROWS_AS(train_stereo(a, data, o, small_loss()), ContractError);
}

TEST_CASE("edge-aware fine-tuning reduces to plain fine-tuning without labels") {
  const auto data = small_data(2, 22);
  StereoModel base(small_model());
  EdgeEstimator est;
  const auto edges = predict_target_edges(base, est, data);
  REQUIRE(edges.size() == 2);
  DapeConfig cfg;
  cfg.optim.steps = 4;
  cfg.optim.learning_rate = 1e-3;
  cfg.loss = small_loss();

  auto plain = clone_model(base);
  finetune_plain(*plain, data, cfg);

  // Fresh estimator output is 0.5 everywhere: the smallest positive t selects
  // nothing and t = 1 selects every pixel.
  const auto none = select_pseudo_labels(edges, std::numeric_limits<double>::denorm_min(), "x");
  auto a = clone_model(base);
  const DapeResult ra = dape_finetune(*a, data, &none, cfg);
  CHECK(ra.steps_with_edge_term == 0);
  CHECK(ra.empty_label_steps == 4);
  CHECK(a->parameters().values_equal(plain->parameters()));

  const auto all = select_pseudo_labels(edges, 1.0, "x");
  for (const auto& l : all.labels) CHECK(l.valid.count() == l.valid.size());
  auto b = clone_model(base);
  const DapeResult rb = dape_finetune(*b, data, &all, cfg);
  CHECK(rb.steps_with_edge_term == 4);
  CHECK(!b->parameters().values_equal(plain->parameters()));

  cfg.edge_weight = 0.0;
  auto c = clone_model(base);
  dape_finetune(*c, data, &all, cfg);
  CHECK(c->parameters().values_equal(plain->parameters()));

  CHECK_THROWS_AS(dape_finetune(*c, data, nullptr, cfg), ContractError);
  PseudoLabelCache short_cache = all;
  short_cache.labels.pop_back();
  CHECK_THROWS_AS(dape_finetune(*c, data, &short_cache, cfg), ContractError);
}

TEST_CASE("edge estimator training lowers its loss") {
  const auto data = small_data(2, 23);
  StereoModel model(small_model());
  EdgeEstimator est;
  OptimConfig o;
  o.steps = 30;
  o.learning_rate = 4e-3;
  const auto log = train_edge_estimator(est, model, data, o);
  REQUIRE(log.size() == 30);
  CHECK(log.back().loss_edge < log.front().loss_edge);
}
