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

// Closed-form scalar and field operations shared by every stage of the
// pipeline: symmetric clipping, the clip-balanced loss weight and the losses
// built on it, Prewitt gradient magnitude, and bilinear resampling.

#pragma once

#include "srstereo/tensor.hpp"

namespace srstereo {

/// Positive clip range in disparity pixels.
class ClipBound {
 public:
  explicit ClipBound(double m) : m_(m) { require(m > 0.0, "ClipBound: m must be positive"); }
  double value() const { return m_; }
  /// Quarter-resolution ceiling of one disparity clip.
  double quarter_limit() const { return 1.5 * m_; }
  /// Full-resolution ceiling (x4 upsampling of the quarter limit).
  double full_limit() const { return 6.0 * m_; }

 private:
  double m_;
};

/// Upper bound of the balanced weight.
inline constexpr double kBalancedWeightCap = 1.5;

double clip_symmetric(double x, double bound);
double balanced_weight(double x, double h);
double cb_l1(double x, double h);
double cb_smooth_l1(double x, double h);

// Derivatives of the losses with respect to x; 0 at x == 0.
double cb_l1_grad(double x, double h);
double cb_smooth_l1_grad(double x, double h);

Tensor clip_symmetric(const Tensor& x, double bound);
Tensor balanced_weight(const Tensor& x, double h);
Tensor cb_l1(const Tensor& x, double h);
Tensor cb_smooth_l1(const Tensor& x, double h);

/// Gradient magnitude sqrt(Gx^2 + Gy^2) with 3x3 Prewitt kernels and
/// replicate borders. Requires a field of at least 3x3.
Tensor prewitt_magnitude(const Tensor& field);

/// Signed Prewitt responses (Gx, Gy) for a single-channel field.
std::pair<Tensor, Tensor> prewitt_responses(const Tensor& field);

/// Output size of resizing `n` samples by `scale` (floor, at least 1 required).
int resized_extent(int n, double scale);

/// Bilinear resize (half-pixel centres, clamped borders) of every channel to
/// the given size. Values are not rescaled.
Tensor resize_bilinear(const Tensor& x, int out_height, int out_width);

/// Bilinear resize of values plus nearest-neighbour resize of the mask.
ScalarField resize_bilinear(const ScalarField& field, double scale);

}  // namespace srstereo
