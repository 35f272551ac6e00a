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

// Stereo trunk at quarter resolution: feature and context encoders, the
// correlation cost volume with one pooled level, cost lookup around the
// current disparity, soft-argmax initialisation, and x4 upsampling.

#pragma once

#include <string>

#include "srstereo/nn.hpp"

namespace srstereo {

inline constexpr int kLookupRadius = 4;
inline constexpr int kLookupChannels = 2 * (2 * kLookupRadius + 1);
inline constexpr int kDownsample = 4;

/// Two stride-2 convolutions, a residual block and a 1x1 projection.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  FeatureEncoder(ParameterStore& store, const std::string& name, int in_channels, int out_channels, Rng& rng);

  ag::Var operator()(const ag::Var& image) const;
  int out_channels() const { return out_channels_; }

  struct LayerGeom {
    int kernel, stride, pad;
  };
  /// Spatial layer stack, input to output, for receptive-field analysis.
  static std::vector<LayerGeom> layer_stack();

 private:
  Conv down1_, down2_, res1_, res2_, proj_;
  int out_channels_ = 0;
};

struct CostVolume {
  ag::Var cost;    // levels x H/4 x W/4
  ag::Var pooled;  // levels/2 x H/4 x W/4
  int levels() const { return cost.value().channels(); }
};

/// Quarter-resolution disparity levels for a full-resolution maximum.
int disparity_levels(double d_max_full);

/// Cosine-similarity volume; features are L2-normalised per pixel first.
CostVolume build_cost_volume(const ag::Var& f_left, const ag::Var& f_right, int levels);

ag::Var lookup(const CostVolume& volume, const ag::Var& d_quarter);

ag::Var initial_disparity(const CostVolume& volume, double temperature);

enum class UpsampleMode { kBilinear, kConvex };

/// Quarter- to full-resolution disparity (values x4).
class DisparityUpsampler {
 public:
  DisparityUpsampler() = default;
  DisparityUpsampler(ParameterStore& store, const std::string& name, UpsampleMode mode, int feature_channels,
                     Rng& rng);

  ag::Var operator()(const ag::Var& d_quarter, const ag::Var& f_left) const;
  /// Convex-mask logits predicted from the left features.
  ag::Var mask_logits(const ag::Var& f_left) const;
  UpsampleMode mode() const { return mode_; }

 private:
  UpsampleMode mode_ = UpsampleMode::kBilinear;
  Conv mask1_, mask2_;
};

/// Replicate-pads an image on the bottom/right to multiples of `multiple`.
Image pad_to_multiple(const Image& img, int multiple);

}  // namespace srstereo
