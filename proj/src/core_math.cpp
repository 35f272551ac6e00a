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

#include "srstereo/core_math.hpp"

#include <cmath>

namespace srstereo {

double clip_symmetric(double x, double bound) {
  require(bound > 0.0, "clip_symmetric: bound must be positive");
  return std::clamp(x, -bound, bound);
}

double balanced_weight(double x, double h) {
  require(h >= 0.0, "balanced_weight: h must be non-negative");
  const double a = std::abs(x);
  if (h == 0.0) return 1.0;
  if (a == 0.0) return kBalancedWeightCap;
  return std::min(kBalancedWeightCap, std::pow(a, -h));
}

double cb_l1(double x, double h) { return balanced_weight(x, h) * std::abs(x); }

double cb_smooth_l1(double x, double h) {
  const double a = std::abs(x);
  const double w = balanced_weight(x, h);
  return a < 1.0 ? w * 0.5 * x * x : w * (a - 0.5);
}

namespace {

// d/da of the balanced weight at a > 0.
double weight_slope(double a, double h) {
  if (h == 0.0 || std::pow(a, -h) >= kBalancedWeightCap) return 0.0;
  return -h * std::pow(a, -h - 1.0);
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double cb_l1_grad(double x, double h) {
  const double a = std::abs(x);
  if (a == 0.0) return 0.0;
  return sign(x) * (balanced_weight(x, h) + weight_slope(a, h) * a);
}

double cb_smooth_l1_grad(double x, double h) {
  const double a = std::abs(x);
  if (a == 0.0) return 0.0;
  const double w = balanced_weight(x, h);
  const double ws = weight_slope(a, h);
  if (a < 1.0) return sign(x) * (w * a + ws * 0.5 * a * a);
  return sign(x) * (w + ws * (a - 0.5));
}

namespace {

template <class F>
Tensor map(const Tensor& x, F f) {
  Tensor out(x.channels(), x.height(), x.width());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return out;
}

}  // namespace

Tensor clip_symmetric(const Tensor& x, double bound) {
  require(bound > 0.0, "clip_symmetric: bound must be positive");
  return map(x, [bound](double v) { return std::clamp(v, -bound, bound); });
}

Tensor balanced_weight(const Tensor& x, double h) {
  require(h >= 0.0, "balanced_weight: h must be non-negative");
  return map(x, [h](double v) { return balanced_weight(v, h); });
}

Tensor cb_l1(const Tensor& x, double h) {
  return map(x, [h](double v) { return cb_l1(v, h); });
}

Tensor cb_smooth_l1(const Tensor& x, double h) {
  return map(x, [h](double v) { return cb_smooth_l1(v, h); });
}

std::pair<Tensor, Tensor> prewitt_responses(const Tensor& field) {
  require(field.channels() == 1, "prewitt: single-channel field required");
  const int H = field.height(), W = field.width();
  require(H >= 3 && W >= 3, "prewitt: field must be at least 3x3");
  Tensor gx(1, H, W), gy(1, H, W);
  auto v = [&](int y, int x) {
    return field.at(0, std::clamp(y, 0, H - 1), std::clamp(x, 0, W - 1));
  };
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double sx = 0.0, sy = 0.0;
      for (int k = -1; k <= 1; ++k) {
        sx += v(y + k, x + 1) - v(y + k, x - 1);
        sy += v(y + 1, x + k) - v(y - 1, x + k);
      }
      gx.at(0, y, x) = sx;
      gy.at(0, y, x) = sy;
    }
  }
  return {std::move(gx), std::move(gy)};
}

Tensor prewitt_magnitude(const Tensor& field) {
  auto [gx, gy] = prewitt_responses(field);
  Tensor out(1, field.height(), field.width());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::hypot(gx[i], gy[i]);
  return out;
}

int resized_extent(int n, double scale) {
  require(scale > 0.0, "resize: scale must be positive");
  const int out = static_cast<int>(std::floor(n * scale + 1e-9));
  require(out >= 1, "resize: degenerate output size");
  return out;
}

namespace {

struct Tap {
  int i0, i1;
  double f;
};

std::vector<Tap> taps(int in, int out) {
  std::vector<Tap> t(out);
  const double ratio = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    double s = (o + 0.5) * ratio - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in - 1));
    int i0 = static_cast<int>(std::floor(s));
    int i1 = std::min(i0 + 1, in - 1);
    t[o] = {i0, i1, s - i0};
  }
  return t;
}

}  // namespace

Tensor resize_bilinear(const Tensor& x, int out_height, int out_width) {
  require(out_height >= 1 && out_width >= 1, "resize: degenerate output size");
  if (out_height == x.height() && out_width == x.width()) return x;
  const auto ty = taps(x.height(), out_height);
  const auto tx = taps(x.width(), out_width);
  Tensor out(x.channels(), out_height, out_width);
  for (int c = 0; c < x.channels(); ++c) {
    for (int y = 0; y < out_height; ++y) {
      const auto& a = ty[y];
      for (int xo = 0; xo < out_width; ++xo) {
        const auto& b = tx[xo];
        const double top = (1 - b.f) * x.at(c, a.i0, b.i0) + b.f * x.at(c, a.i0, b.i1);
        const double bot = (1 - b.f) * x.at(c, a.i1, b.i0) + b.f * x.at(c, a.i1, b.i1);
        out.at(c, y, xo) = (1 - a.f) * top + a.f * bot;
      }
    }
  }
  return out;
}

ScalarField resize_bilinear(const ScalarField& field, double scale) {
  const int oh = resized_extent(field.height(), scale);
  const int ow = resized_extent(field.width(), scale);
  Tensor values = resize_bilinear(field.values, oh, ow);
  Mask valid(oh, ow);
  const double ry = static_cast<double>(field.height()) / oh;
  const double rx = static_cast<double>(field.width()) / ow;
  for (int y = 0; y < oh; ++y) {
    const int sy = std::min(static_cast<int>(std::floor((y + 0.5) * ry)), field.height() - 1);
    for (int x = 0; x < ow; ++x) {
      const int sx = std::min(static_cast<int>(std::floor((x + 0.5) * rx)), field.width() - 1);
      valid.set(y, x, field.valid.at(sy, sx));
    }
  }
  return ScalarField(std::move(values), std::move(valid));
}

}  // namespace srstereo
