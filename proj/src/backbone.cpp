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

#include "srstereo/backbone.hpp"

#include <cmath>

namespace srstereo {

namespace {
constexpr int kTrunkChannels = 16;
constexpr int kMaskHidden = 32;
}  // namespace

FeatureEncoder::FeatureEncoder(ParameterStore& store, const std::string& name, int in_channels, int out_channels,
                               Rng& rng)
    : out_channels_(out_channels) {
  down1_ = make_conv(store, name + ".down1", in_channels, kTrunkChannels, 3, 2, rng);
  down2_ = make_conv(store, name + ".down2", kTrunkChannels, kTrunkChannels, 3, 2, rng);
  res1_ = make_conv(store, name + ".res1", kTrunkChannels, kTrunkChannels, 3, 1, rng);
  res2_ = make_conv(store, name + ".res2", kTrunkChannels, kTrunkChannels, 3, 1, rng);
  proj_ = make_conv(store, name + ".proj", kTrunkChannels, out_channels, 1, 1, rng);
}

ag::Var FeatureEncoder::operator()(const ag::Var& image) const {
  ag::Var x = ag::relu(down1_(image));
  x = ag::relu(down2_(x));
  x = ag::relu(ag::add(x, res2_(ag::relu(res1_(x)))));
  return proj_(x);
}

std::vector<FeatureEncoder::LayerGeom> FeatureEncoder::layer_stack() {
  return {{3, 2, 1}, {3, 2, 1}, {3, 1, 1}, {3, 1, 1}, {1, 1, 0}};
}

int disparity_levels(double d_max_full) {
  require(d_max_full > 0.0, "disparity_levels: d_max must be positive");
  return static_cast<int>(std::ceil(d_max_full / kDownsample)) + 1;
}

CostVolume build_cost_volume(const ag::Var& f_left, const ag::Var& f_right, int levels) {
  require(levels >= 2, "build_cost_volume: need at least two disparity levels");
  require(levels <= f_left.value().width(), "build_cost_volume: disparity levels exceed feature width");
  CostVolume v;
  v.cost = ag::correlation(ag::l2_normalize(f_left), ag::l2_normalize(f_right), levels);
  v.pooled = ag::pool_disparity(v.cost);
  return v;
}

ag::Var lookup(const CostVolume& volume, const ag::Var& d_quarter) {
  return ag::lookup(volume.cost, volume.pooled, d_quarter, kLookupRadius);
}

ag::Var initial_disparity(const CostVolume& volume, double temperature) {
  return ag::soft_argmax(volume.cost, temperature);
}

DisparityUpsampler::DisparityUpsampler(ParameterStore& store, const std::string& name, UpsampleMode mode,
                                       int feature_channels, Rng& rng)
    : mode_(mode) {
  if (mode_ == UpsampleMode::kConvex) {
    mask1_ = make_conv(store, name + ".mask1", feature_channels, kMaskHidden, 3, 1, rng);
    // Zero logits give uniform convex weights at initialisation.
    mask2_ = make_conv(store, name + ".mask2", kMaskHidden, 9 * kDownsample * kDownsample, 1, 1, rng, Init::kZero);
  }
}

ag::Var DisparityUpsampler::mask_logits(const ag::Var& f_left) const {
  require(mode_ == UpsampleMode::kConvex, "mask_logits: upsampler is not convex");
  return mask2_(ag::relu(mask1_(f_left)));
}

ag::Var DisparityUpsampler::operator()(const ag::Var& d_quarter, const ag::Var& f_left) const {
  if (mode_ == UpsampleMode::kBilinear) return ag::upsample_bilinear(d_quarter, kDownsample, kDownsample);
  return ag::upsample_convex(d_quarter, mask_logits(f_left), kDownsample, kDownsample);
}

Image pad_to_multiple(const Image& img, int multiple) {
  const int H = (img.height() + multiple - 1) / multiple * multiple;
  const int W = (img.width() + multiple - 1) / multiple * multiple;
  if (H == img.height() && W == img.width()) return img;
  Image out(img.channels(), H, W);
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        out.at(c, y, x) = img.at(c, std::min(y, img.height() - 1), std::min(x, img.width() - 1));
  return out;
}

}  // namespace srstereo
