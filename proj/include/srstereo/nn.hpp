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

// Parameters, layers, initialisation and the optimiser.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "srstereo/autograd.hpp"

namespace srstereo {

using Rng = std::mt19937_64;

/// Named, insertion-ordered collection of trainable tensors.
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    ag::Var var;
  };

  ag::Var add(const std::string& name, Tensor init);
  const ag::Var& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();
  void set_trainable(bool trainable);
  /// Copies every value from `other`; names and shapes must match.
  void copy_values_from(const ParameterStore& other);
  bool values_equal(const ParameterStore& other) const;

 private:
  std::vector<Entry> entries_;
};

enum class Init { kFanInUniform, kOrthogonal, kZero };

/// Convolution with (out, in, k*k) weight and (out, 1, 1) bias.
struct Conv {
  ag::Var weight, bias;
  int stride = 1, pad = 0;

  ag::Var operator()(const ag::Var& x) const { return ag::conv2d(x, weight, bias, stride, pad); }
};

Conv make_conv(ParameterStore& store, const std::string& name, int in, int out, int kernel, int stride,
               Rng& rng, Init init = Init::kFanInUniform);

/// Pre-activation residual block: conv(relu(conv(relu(x)))) + skip, with a
/// 1x1 projection on the skip path when the channel count changes.
struct ResBlock {
  Conv conv1, conv2;
  bool has_proj = false;
  Conv proj;

  ag::Var operator()(const ag::Var& x) const;
};

ResBlock make_resblock(ParameterStore& store, const std::string& name, int in, int out, Rng& rng);

/// Linear warmup over the first 10% of steps from peak/25 to peak, then
/// cosine decay back to peak/25.
class OneCycleSchedule {
 public:
  OneCycleSchedule(double peak, int total_steps);
  double at(int step) const;

 private:
  double peak_;
  int total_;
  int warmup_;
};

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-5;
  double clip_norm = 1.0;  // <= 0 disables global-norm clipping
};

/// Adaptive moments with decoupled weight decay, over the trainable entries
/// of a store.
class AdamW {
 public:
  AdamW(ParameterStore& store, AdamWConfig cfg);
  /// Applies one update with the accumulated gradients scaled by grad_scale.
  /// Returns the pre-clipping gradient norm.
  double step(double lr, double grad_scale = 1.0);

 private:
  ParameterStore& store_;
  AdamWConfig cfg_;
  std::vector<Tensor> m_, v_;
  long t_ = 0;
};

/// SplitMix64 mix, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace srstereo
