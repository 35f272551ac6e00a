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

#include "srstereo/edge.hpp"

#include <cmath>

#include "srstereo/core_math.hpp"
#include "srstereo/model.hpp"

namespace srstereo {

EdgeEstimator::EdgeEstimator(const EdgeEstimatorConfig& cfg) : cfg_(cfg) {
  Rng rng(cfg_.init_seed);
  edge_block_ = make_resblock(params_, "edge.feature", 1, kEdgeFeatureChannels, rng);
  refine_block_ = make_resblock(params_, "edge.refine", kEdgeFeatureChannels + 3, kRefineChannels, rng);
  out_ = make_conv(params_, "edge.out", kRefineChannels, 1, 1, 1, rng, Init::kZero);
}

ag::Var EdgeEstimator::forward(const ag::Var& d_input, const Image& rgb) const {
  const Tensor& d = d_input.value();
  require(d.channels() == 1 && rgb.channels() == 3 && d.height() == rgb.height() && d.width() == rgb.width(),
          "edge_estimate: disparity/image shape mismatch");
  ag::Var din = cfg_.zero_disparity_input ? ag::constant(Tensor(1, d.height(), d.width())) : d_input;
  // Per-image standardisation removes the scene's disparity level, which
  // otherwise dominates the features and saturates the sigmoid early.
  ag::Var f_edge = edge_block_(ag::standardize(din));
  ag::Var f_refine = refine_block_(ag::concat({f_edge, ag::constant(rgb)}));
  return ag::sigmoid(out_(f_refine));
}

EdgeMap EdgeEstimator::estimate(const Tensor& d_input, const Image& rgb) const {
  NoGradGuard guard(const_cast<ParameterStore&>(params_));
  return {forward(ag::constant(d_input), rgb).value(), EdgeKind::kPredicted};
}

EdgeMap edge_gt_extract(const DisparityMap& d_gt) {
  require(d_gt.valid.count() == d_gt.valid.size(), "edge_gt_extract: ground truth must be dense");
  Tensor mag = prewitt_magnitude(d_gt.values);
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = mag[i] > kEdgeGradientThreshold ? 1.0 : 0.0;
  return {std::move(mag), EdgeKind::kBinaryGt};
}

Mask edge_mask(const EdgeMap& edge, double threshold) {
  Mask m(edge.values.height(), edge.values.width());
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, edge.values[i] >= threshold);
  return m;
}

ag::Var soft_edge_of_disparity(const ag::Var& d_pred) {
  Tensor shift(1, d_pred.value().height(), d_pred.value().width(), -kEdgeGradientThreshold);
  return ag::sigmoid(ag::scale(ag::add(ag::prewitt_magnitude(d_pred), ag::constant(std::move(shift))),
                               kSoftEdgeSharpness));
}

EdgeMap soft_edge_of_disparity(const Tensor& d_pred) {
  return {soft_edge_of_disparity(ag::constant(d_pred)).value(), EdgeKind::kSoftFromDisparity};
}

PseudoLabel pseudo_label_select(const EdgeMap& edge_pred, double t) {
  require(t > 0.0 && t <= 1.0, "pseudo_label_select: threshold must lie in (0, 1]");
  PseudoLabel p;
  p.values = edge_pred.values;
  p.threshold = t;
  p.valid = Mask(p.values.height(), p.values.width());
  for (std::size_t i = 0; i < p.values.size(); ++i) p.valid.set(i, p.values[i] < t);
  return p;
}

EdgeLoss edge_loss(const ag::Var& edge, const PseudoLabel& label) {
  EdgeLoss out;
  out.empty = label.valid.count() == 0;
  out.loss = ag::masked_loss(edge, label.values, label.valid, ag::LossKind::kSmoothL1, 0.0);
  return out;
}

EdgeLoss edge_loss(const ag::Var& edge, const EdgeMap& target) {
  const Mask all(target.values.height(), target.values.width(), true);
  return {ag::masked_loss(edge, target.values, all, ag::LossKind::kSmoothL1, 0.0), false};
}

}  // namespace srstereo
