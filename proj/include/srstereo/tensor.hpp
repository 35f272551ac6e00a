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

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace srstereo {

/// Thrown when a caller breaks an operation's precondition.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractError(what);
}

/// Dense channels x height x width grid of doubles, row-major.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int channels, int height, int width, double fill = 0.0)
      : c_(channels), h_(height), w_(width),
        data_(static_cast<std::size_t>(channels) * height * width, fill) {
    require(channels >= 0 && height >= 0 && width >= 0, "Tensor: negative dimension");
  }

  int channels() const { return c_; }
  int height() const { return h_; }
  int width() const { return w_; }
  int plane() const { return h_ * w_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const Tensor& o) const { return c_ == o.c_ && h_ == o.h_ && w_ == o.w_; }

  double& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  const double& at(int c, int y, int x) const { return data_[index(c, y, x)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  const double& operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  std::span<double> channel(int c) {
    return {data_.data() + static_cast<std::size_t>(c) * plane(), static_cast<std::size_t>(plane())};
  }
  std::span<const double> channel(int c) const {
    return {data_.data() + static_cast<std::size_t>(c) * plane(), static_cast<std::size_t>(plane())};
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  std::string shape_str() const {
    return std::to_string(c_) + "x" + std::to_string(h_) + "x" + std::to_string(w_);
  }

  bool operator==(const Tensor&) const = default;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * h_ + y) * w_ + x;
  }

  int c_ = 0, h_ = 0, w_ = 0;
  std::vector<double> data_;
};

/// Boolean grid paired with single-channel fields.
class Mask {
 public:
  Mask() = default;
  Mask(int height, int width, bool fill = false)
      : h_(height), w_(width), data_(static_cast<std::size_t>(height) * width, fill ? 1 : 0) {}

  int height() const { return h_; }
  int width() const { return w_; }
  std::size_t size() const { return data_.size(); }
  bool at(int y, int x) const { return data_[static_cast<std::size_t>(y) * w_ + x] != 0; }
  void set(int y, int x, bool v) { data_[static_cast<std::size_t>(y) * w_ + x] = v ? 1 : 0; }
  bool operator[](std::size_t i) const { return data_[i] != 0; }
  void set(std::size_t i, bool v) { data_[i] = v ? 1 : 0; }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : data_) n += v;
    return n;
  }
  bool operator==(const Mask&) const = default;

 private:
  int h_ = 0, w_ = 0;
  std::vector<unsigned char> data_;
};

/// Single-channel field with a validity mask (disparity maps, residuals, gradients).
struct ScalarField {
  Tensor values;  // 1 x H x W
  Mask valid;

  ScalarField() = default;
  ScalarField(int height, int width, double fill = 0.0, bool valid_fill = true)
      : values(1, height, width, fill), valid(height, width, valid_fill) {}
  ScalarField(Tensor v, Mask m) : values(std::move(v)), valid(std::move(m)) {
    require(values.channels() == 1, "ScalarField: values must have one channel");
    require(values.height() == valid.height() && values.width() == valid.width(),
            "ScalarField: mask shape mismatch");
  }
  static ScalarField dense(Tensor v) {
    Mask m(v.height(), v.width(), true);
    return ScalarField(std::move(v), std::move(m));
  }

  int height() const { return values.height(); }
  int width() const { return values.width(); }
  double& at(int y, int x) { return values.at(0, y, x); }
  double at(int y, int x) const { return values.at(0, y, x); }
};

using DisparityMap = ScalarField;

/// Three-channel RGB image with channel values in [0, 1].
using Image = Tensor;

}  // namespace srstereo
