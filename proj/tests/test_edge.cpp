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

#include "srstereo/edge.hpp"
#include "test_util.hpp"

using namespace srstereo;
using namespace srstereo::testing;

namespace {

DisparityMap step_map(double lo, double hi, int h = 6, int w = 8, int at = 4) {
  DisparityMap d(h, w, lo, true);
  for (int y = 0; y < h; ++y)
    for (int x = at; x < w; ++x) d.at(y, x) = hi;
  return d;
}

}  // namespace

TEST_CASE("edge ground truth thresholds the Prewitt magnitude") {
  // A step of 2 gives magnitude 6 > 5 on both sides of the boundary.
  const EdgeMap e = edge_gt_extract(step_map(3.0, 5.0));
  CHECK(e.kind == EdgeKind::kBinaryGt);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 8; ++x) CHECK(e.values.at(0, y, x) == ((x == 3 || x == 4) ? 1.0 : 0.0));
  // A step of 1.5 gives 4.5: no edge.
  CHECK(edge_mask(edge_gt_extract(step_map(3.0, 4.5))).count() == 0);
  DisparityMap sparse = step_map(3.0, 5.0);
  sparse.valid.set(0, 0, false);
  CHECK_THROWS_AS(edge_gt_extract(sparse), ContractError);
}

TEST_CASE("soft edge is a sigmoid of the gradient magnitude") {
  const EdgeMap s = soft_edge_of_disparity(step_map(3.0, 5.0).values);
  CHECK(s.kind == EdgeKind::kSoftFromDisparity);
  CHECK(s.values.at(0, 2, 3) == doctest::Approx(1.0 / (1.0 + std::exp(-10.0))).epsilon(1e-14));  // sigma(10)
  CHECK(s.values.at(0, 2, 0) == doctest::Approx(1.0 / (1.0 + std::exp(50.0))).epsilon(1e-12));  // sigma(-50)
  CHECK(s.values.at(0, 2, 0) < 2e-22);
  const ag::Var v = soft_edge_of_disparity(ag::constant(step_map(3.0, 5.0).values));
  CHECK(v.value() == s.values);
}

TEST_CASE("pseudo labels are strict below the threshold and nested in t") {
  Rng rng(71);
  const EdgeMap e{uniform(1, 9, 11, 0.0, 1.0, rng), EdgeKind::kPredicted};
  std::vector<PseudoLabel> ls;
  for (double t : {0.25, 0.5, 0.75, 1.0}) ls.push_back(pseudo_label_select(e, t));
  for (std::size_t k = 0; k < ls.size(); ++k)
    for (std::size_t i = 0; i < e.values.size(); ++i) {
      CHECK(ls[k].valid[i] == (e.values[i] < ls[k].threshold));
      if (k > 0 && ls[k - 1].valid[i]) CHECK(ls[k].valid[i]);
    }
  CHECK(ls.back().values == e.values);
  CHECK_THROWS_AS(pseudo_label_select(e, 0.0), ContractError);
  CHECK_THROWS_AS(pseudo_label_select(e, 1.01), ContractError);
}

TEST_CASE("edge losses") {
  Tensor pred(1, 1, 2), target(1, 1, 2);
  pred[0] = 4.0, pred[1] = 0.5;
  PseudoLabel p{target, Mask(1, 2, true), 0.25};
  // Smooth L1 with h = 0: 3.5 and 0.125.
  CHECK(edge_loss(ag::constant(pred), p).loss.item() == doctest::Approx((3.5 + 0.125) / 2));
  p.valid.set(0, false);
  CHECK(edge_loss(ag::constant(pred), p).loss.item() == doctest::Approx(0.125));
  p.valid.set(1, false);
  const EdgeLoss empty = edge_loss(ag::constant(pred), p);
  CHECK(empty.empty);
  CHECK(empty.loss.item() == 0.0);
  CHECK(edge_loss(ag::constant(pred), EdgeMap{target, EdgeKind::kBinaryGt}).loss.item() ==
        doctest::Approx((3.5 + 0.125) / 2));
}

TEST_CASE("edge estimator") {
  Rng rng(72);
  const EdgeEstimator est;
  CHECK(est.parameters().contains("edge.out.weight"));
  const Tensor d = uniform(1, 12, 16, 0.0, 10.0, rng);
  const Image rgb = uniform(3, 12, 16, 0.0, 1.0, rng);
  const EdgeMap e = est.estimate(d, rgb);
  CHECK(e.kind == EdgeKind::kPredicted);
  CHECK(e.values.height() == 12);
  // Zero-initialised output convolution: sigmoid(0) everywhere.
  for (std::size_t i = 0; i < e.values.size(); ++i) CHECK(e.values[i] == 0.5);
  const EdgeEstimator same;
  CHECK(same.parameters().values_equal(est.parameters()));

  EdgeEstimatorConfig rgb_only;
  rgb_only.zero_disparity_input = true;
  EdgeEstimator blind(rgb_only);
  for (auto& p : blind.parameters().entries()) {
    Tensor& v = p.var.mutable_value();
    v = normal(v.channels(), v.height(), v.width(), 0.3, rng);
  }
  // The disparity input is ignored by the RGB-only variant.
  CHECK(blind.estimate(d, rgb).values == blind.estimate(Tensor(1, 12, 16, 3.0), rgb).values);
  CHECK_THROWS_AS(est.estimate(Tensor(1, 12, 15), rgb), ContractError);
}
