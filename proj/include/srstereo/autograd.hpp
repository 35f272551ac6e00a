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

// Reverse-mode differentiation over Tensor values.
//
// Every op returns a Var that owns its value and, when any input requires a
// gradient, a closure that pushes the output gradient back to its inputs.
// Graphs are freed when the last Var referring to them goes away. Ops on
// inputs that do not require gradients record nothing, so inference runs
// without graph overhead.

#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "srstereo/tensor.hpp"

namespace srstereo::ag {

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  Tensor& grad_buffer() {
    if (grad.empty() && !value.empty()) grad = Tensor(value.channels(), value.height(), value.width());
    return grad;
  }
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  Tensor& grad_buffer() { return node_->grad_buffer(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void zero_grad() { node_->grad = Tensor(); }
  double item() const;
  explicit operator bool() const { return static_cast<bool>(node_); }
  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

Var constant(Tensor value);
Var leaf(Tensor value, bool requires_grad = true);

/// Back-propagates from a scalar (1x1x1) root; gradients accumulate into
/// every reachable node that requires them.
void backward(const Var& root);

// Elementwise arithmetic (operands of equal shape).
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
/// max(a, lo); gradient passes only where a > lo.
Var clamp_min(const Var& a, double lo);
/// Value unchanged, no gradient flows through.
Var detach(const Var& a);

/// Sum of a list of scalars.
Var sum_scalars(const std::vector<Var>& terms);

Var concat(const std::vector<Var>& parts);
Var slice_channels(const Var& a, int first, int count);
/// Top-left crop to (height, width).
Var crop(const Var& a, int height, int width);

/// 2-D convolution. weight is (out, in, k*k), bias is (out, 1, 1) or empty.
/// Zero padding of `pad` pixels on every side.
Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad);

/// Per-pixel L2 normalisation across channels, x / sqrt(|x|^2 + eps).
Var l2_normalize(const Var& x, double eps = 1e-6);

/// Per-channel standardisation over all pixels, (x - mean) / sqrt(var + eps).
Var standardize(const Var& x, double eps = 1e-6);

/// cost[d, y, x] = <left(:, y, x), right(:, y, x - d)>, zero when x - d < 0.
Var correlation(const Var& left, const Var& right, int levels);

/// Average pooling along the channel (disparity) axis, window 2 stride 2.
Var pool_disparity(const Var& cost);

/// Linear sampling of `cost` at d + r and `pooled` at d / 2 + r for
/// r = -radius..radius, clamped to each volume's extent.
Var lookup(const Var& cost, const Var& pooled, const Var& disparity, int radius);

/// sum_d d * softmax(cost[:, y, x] / temperature)[d].
Var soft_argmax(const Var& cost, double temperature);

/// Bilinear upsampling by an integer factor (half-pixel centres, clamped
/// borders), values multiplied by value_scale.
Var upsample_bilinear(const Var& x, int factor, double value_scale);

/// Convex upsampling: every output pixel is a softmax-weighted combination
/// of the 3x3 coarse neighbourhood (replicate borders). mask_logits has
/// 9 * factor^2 channels, laid out as [k][i][j].
Var upsample_convex(const Var& x, const Var& mask_logits, int factor, double value_scale);

/// Prewitt gradient magnitude with replicate borders; subgradient 0 where
/// the magnitude vanishes.
Var prewitt_magnitude(const Var& x);

/// tanh(raw / m) * m * (1 + 0.5 w), held strictly inside (-1.5 m, 1.5 m).
Var disparity_clip(const Var& raw, const Var& weight, double m);

/// sum(x * weights); used to project tensors onto scalars.
Var weighted_sum(const Var& x, const Tensor& weights);

enum class LossKind { kL1, kSmoothL1 };

/// Mean of the clip-balanced loss of (pred - target) over valid pixels.
/// Returns a constant 0 when no pixel is valid.
Var masked_loss(const Var& pred, const Tensor& target, const Mask& valid, LossKind kind, double h);

}  // namespace srstereo::ag
