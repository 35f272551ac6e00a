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

// Synthetic rectified stereo scenes built from fronto-parallel layers with
// constant integer disparity. Every layer carries an analytic texture
// attached to the surface, so the right view is an exact resampling of the
// left one and occlusions follow from a z-buffer on disparity.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srstereo/tensor.hpp"

namespace srstereo {

enum class ShapeKind { kRectangle, kEllipse };

/// Axis-aligned bounding box of a shape in left-image pixel coordinates.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::kRectangle;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct TextureProfile {
  double noise_amplitude = 0.5;  // [0, 1]
  double sine_frequency = 0.12;  // cycles per pixel
};

struct SceneSpec {
  std::uint64_t seed = 0;
  int height = 64;
  int width = 96;
  int num_layers = 3;  // layer 0 is the full-frame background
  double d_min = 0.0;
  double d_max = 24.0;
  TextureProfile texture;
  /// Foreground shapes, one per layer above the background. Empty means
  /// "draw them from the seed".
  std::vector<ShapeSpec> shapes;
  double noise_sigma = 0.02;

  /// Throws ContractError when an invariant is broken.
  void validate() const;
};

struct StereoSample {
  Image left, right;
  DisparityMap disparity_gt;  // dense
  Mask occlusion;             // occluded in the right view or out of its frame
  std::vector<double> layer_disparities;
};

/// Deterministic in spec (including seed).
StereoSample generate_scene(const SceneSpec& spec);

/// Edge-erased, randomly thinned ground truth. `edge` holds an edge map
/// (values >= 0.5 count as edge).
DisparityMap sparsify_gt(const DisparityMap& d_gt, const Tensor& edge, double drop_prob, std::uint64_t seed);

struct DisparityRange {
  double d_min, d_max;
};

/// One spec per range; seeds derived from the base seed and the range index.
std::vector<SceneSpec> make_domain_suite(const SceneSpec& base, const std::vector<DisparityRange>& ranges);

/// Spec of the index-th sample of a domain (seed derived from the domain seed).
SceneSpec sample_spec(const SceneSpec& domain, int index);

}  // namespace srstereo
