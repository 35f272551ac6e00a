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

// Edge maps from disparity: a small learned estimator, the thresholded
// Prewitt ground truth, its sigmoid relaxation for predicted disparities,
// and background pseudo-labels selected below a threshold.

#pragma once

#include <cstdint>

#include "srstereo/nn.hpp"

namespace srstereo {

enum class EdgeKind { kPredicted, kBinaryGt, kSoftFromDisparity };

struct EdgeMap {
  Tensor values;  // 1 x H x W, in [0, 1]
  EdgeKind kind = EdgeKind::kPredicted;
};

/// Sub-threshold (background) pixels of a predicted edge map.
struct PseudoLabel {
  Tensor values;
  Mask valid;
  double threshold = 0.25;
};

/// Prewitt magnitude above which a ground-truth pixel is an edge.
inline constexpr double kEdgeGradientThreshold = 5.0;
/// Slope of the sigmoid relaxation of that threshold.
inline constexpr double kSoftEdgeSharpness = 10.0;

inline constexpr int kEdgeFeatureChannels = 29;
inline constexpr int kRefineChannels = 16;

struct EdgeEstimatorConfig {
  bool zero_disparity_input = false;  // RGB-only ablation
  std::uint64_t init_seed = 7;
};

/// ResBlock(standardised disparity) -> 29 ch; ResBlock(concat(that, rgb))
/// -> 16 ch; sigmoid(1x1 conv). The final conv starts at zero (constant 0.5
/// output).
class EdgeEstimator {
 public:
  explicit EdgeEstimator(const EdgeEstimatorConfig& cfg = {});
  EdgeEstimator(const EdgeEstimator&) = delete;
  EdgeEstimator& operator=(const EdgeEstimator&) = delete;

  ag::Var forward(const ag::Var& d_input, const Image& rgb) const;
  EdgeMap estimate(const Tensor& d_input, const Image& rgb) const;

  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }
  const EdgeEstimatorConfig& config() const { return cfg_; }

 private:
  EdgeEstimatorConfig cfg_;
  ParameterStore params_;
  ResBlock edge_block_, refine_block_;
  Conv out_;
};

/// 1 where prewitt_magnitude(d_gt) > 5. Rejects sparse maps.
EdgeMap edge_gt_extract(const DisparityMap& d_gt);
Mask edge_mask(const EdgeMap& edge, double threshold = 0.5);

/// sigmoid(10 (prewitt_magnitude(d) - 5)).
ag::Var soft_edge_of_disparity(const ag::Var& d_pred);
EdgeMap soft_edge_of_disparity(const Tensor& d_pred);

/// Valid exactly where edge_pred < t. Requires 0 < t <= 1.
PseudoLabel pseudo_label_select(const EdgeMap& edge_pred, double t);

struct EdgeLoss {
  ag::Var loss;
  bool empty = false;  // no valid pixels; loss is a constant 0
};

/// Smooth-L1 mean over the label's valid pixels.
EdgeLoss edge_loss(const ag::Var& edge, const PseudoLabel& label);
/// Smooth-L1 mean against a dense target (estimator training).
EdgeLoss edge_loss(const ag::Var& edge, const EdgeMap& target);

}  // namespace srstereo
