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

#include "srstereo/scene.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "srstereo/nn.hpp"

namespace srstereo {

void SceneSpec::validate() const {
  require(height >= 4 && width >= 4, "SceneSpec: image too small");
  require(num_layers >= 1, "SceneSpec: need at least one layer");
  require(d_min >= 0.0 && d_min <= d_max, "SceneSpec: need 0 <= d_min <= d_max");
  require(std::ceil(d_min) <= std::floor(d_max), "SceneSpec: disparity range holds no integer");
  require(d_max < width / 2.0, "SceneSpec: d_max must be below width / 2");
  require(texture.noise_amplitude >= 0.0 && texture.noise_amplitude <= 1.0,
          "SceneSpec: noise_amplitude outside [0, 1]");
  require(texture.sine_frequency >= 0.0, "SceneSpec: negative sine frequency");
  require(noise_sigma >= 0.0, "SceneSpec: negative noise sigma");
  require(shapes.empty() || static_cast<int>(shapes.size()) == num_layers - 1,
          "SceneSpec: need one shape per foreground layer");
  for (const auto& s : shapes) {
    require(s.x0 >= 0 && s.y0 >= 0 && s.x1 <= width && s.y1 <= height && s.x0 < s.x1 && s.y0 < s.y1,
            "SceneSpec: shape placement outside the image");
  }
}

namespace {

// Enough random plane waves that no layer texture is close to periodic, which would make
// matching ambiguous at multiples of the period.
constexpr int kNoiseWaves = 32;

struct Wave {
  double fx, fy, phase;
  std::array<double, 3> gain;
};

struct LayerTexture {
  std::array<double, 3> base;
  std::vector<Wave> waves;
  double noise_amp;
  double sine_fx, sine_fy, sine_phase, sine_amp;

  // Colour at surface coordinate (u, v); u is the left-image column.
  double at(int channel, double u, double v) const {
    double n = 0.0;
    for (const auto& w : waves) n += w.gain[channel] * std::sin(2 * std::numbers::pi * (w.fx * u + w.fy * v) + w.phase);
    n /= std::sqrt(static_cast<double>(waves.size()));
    const double s = sine_amp * std::sin(2 * std::numbers::pi * (sine_fx * u + sine_fy * v) + sine_phase);
    return std::clamp(base[channel] + noise_amp * 0.5 * n + s, 0.0, 1.0);
  }
};

LayerTexture make_texture(const TextureProfile& profile, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  LayerTexture t;
  for (auto& b : t.base) b = 0.2 + 0.6 * u01(rng);
  for (int k = 0; k < kNoiseWaves; ++k) {
    const double f = 0.04 + 0.3 * u01(rng);
    const double th = 2 * std::numbers::pi * u01(rng);
    Wave w{f * std::cos(th), f * std::sin(th), 2 * std::numbers::pi * u01(rng), {}};
    for (auto& g : w.gain) g = 0.5 + 0.5 * u01(rng);
    t.waves.push_back(w);
  }
  t.noise_amp = profile.noise_amplitude;
  const double th = (u01(rng) - 0.5) * std::numbers::pi / 2;
  t.sine_fx = profile.sine_frequency * std::cos(th);
  t.sine_fy = profile.sine_frequency * std::sin(th);
  t.sine_phase = 2 * std::numbers::pi * u01(rng);
  t.sine_amp = profile.sine_frequency > 0.0 ? 0.12 : 0.0;
  return t;
}

bool inside(const ShapeSpec& s, double x, double y) {
  if (x < s.x0 || x >= s.x1 || y < s.y0 || y >= s.y1) return false;
  if (s.kind == ShapeKind::kRectangle) return true;
  const double cx = 0.5 * (s.x0 + s.x1), cy = 0.5 * (s.y0 + s.y1);
  const double rx = 0.5 * (s.x1 - s.x0), ry = 0.5 * (s.y1 - s.y0);
  const double dx = (x - cx) / rx, dy = (y - cy) / ry;
  return dx * dx + dy * dy <= 1.0;
}

ShapeSpec random_shape(int H, int W, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  ShapeSpec s;
  s.kind = u01(rng) < 0.5 ? ShapeKind::kRectangle : ShapeKind::kEllipse;
  const double w = std::round(W * (0.18 + 0.27 * u01(rng)));
  const double h = std::round(H * (0.2 + 0.35 * u01(rng)));
  s.x0 = std::floor((W - w) * u01(rng));
  s.y0 = std::floor((H - h) * u01(rng));
  s.x1 = s.x0 + w;
  s.y1 = s.y0 + h;
  return s;
}

}  // namespace

StereoSample generate_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int H = spec.height, W = spec.width, L = spec.num_layers;

  const int lo = static_cast<int>(std::ceil(spec.d_min));
  const int hi = static_cast<int>(std::floor(spec.d_max));
  std::uniform_int_distribution<int> pick(lo, hi);
  std::vector<double> disp(L);
  for (auto& d : disp) d = pick(rng);
  // Nearer layers (larger disparity) are composited last.
  std::sort(disp.begin(), disp.end());

  std::vector<ShapeSpec> shapes = spec.shapes;
  if (shapes.empty())
    for (int l = 1; l < L; ++l) shapes.push_back(random_shape(H, W, rng));
  std::vector<LayerTexture> tex;
  for (int l = 0; l < L; ++l) tex.push_back(make_texture(spec.texture, rng));

  // Topmost layer covering left-image pixel centre (x, y); layer 0 covers all.
  auto top_left = [&](double x, double y) {
    for (int l = L - 1; l >= 1; --l)
      if (inside(shapes[l - 1], x, y)) return l;
    return 0;
  };
  auto top_right = [&](int xr, int y) {
    for (int l = L - 1; l >= 1; --l)
      if (inside(shapes[l - 1], xr + disp[l], y)) return l;
    return 0;
  };

  StereoSample s;
  s.left = Image(3, H, W);
  s.right = Image(3, H, W);
  s.disparity_gt = DisparityMap(H, W, 0.0, true);
  s.occlusion = Mask(H, W);
  s.layer_disparities = disp;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const int l = top_left(x, y);
      s.disparity_gt.at(y, x) = disp[l];
      for (int c = 0; c < 3; ++c) s.left.at(c, y, x) = tex[l].at(c, x, y);
      const int xr = x - static_cast<int>(disp[l]);
      s.occlusion.set(y, x, xr < 0 || top_right(xr, y) != l);

      const int lr = top_right(x, y);
      for (int c = 0; c < 3; ++c) s.right.at(c, y, x) = tex[lr].at(c, x + disp[lr], y);
    }
  }

  if (spec.noise_sigma > 0.0) {
    std::normal_distribution<double> nd(0.0, spec.noise_sigma);
    for (Image* img : {&s.left, &s.right})
      for (std::size_t i = 0; i < img->size(); ++i) (*img)[i] = std::clamp((*img)[i] + nd(rng), 0.0, 1.0);
  }
  return s;
}

DisparityMap sparsify_gt(const DisparityMap& d_gt, const Tensor& edge, double drop_prob, std::uint64_t seed) {
  require(edge.channels() == 1 && edge.height() == d_gt.height() && edge.width() == d_gt.width(),
          "sparsify_gt: edge map shape mismatch");
  require(drop_prob >= 0.0 && drop_prob <= 1.0, "sparsify_gt: drop_prob outside [0, 1]");
  Rng rng(seed);
  std::bernoulli_distribution drop(drop_prob);
  DisparityMap out = d_gt;
  for (std::size_t i = 0; i < out.valid.size(); ++i) {
    const bool dropped = drop(rng);  // drawn for every pixel so masks are seed-stable
    if (edge[i] >= 0.5 || dropped) out.valid.set(i, false);
  }
  return out;
}

std::vector<SceneSpec> make_domain_suite(const SceneSpec& base, const std::vector<DisparityRange>& ranges) {
  std::vector<SceneSpec> out;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    SceneSpec s = base;
    s.d_min = ranges[i].d_min;
    s.d_max = ranges[i].d_max;
    s.seed = mix_seed(base.seed, i);
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

SceneSpec sample_spec(const SceneSpec& domain, int index) {
  SceneSpec s = domain;
  s.seed = mix_seed(domain.seed, 0x5eed0000ull + static_cast<std::uint64_t>(index));
  return s;
}

}  // namespace srstereo
