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

#include <cstdint>
#include <memory>

#include "srstereo/regression.hpp"

namespace srstereo {

struct ModelConfig {
  int feature_channels = 16;
  int context_channels = 16;
  int hidden_channels = 16;
  double temperature = 0.1;
  UpsampleMode upsample = UpsampleMode::kBilinear;
  int num_gru = 0;
  int num_sru = 15;
  double m = 2.0;
  std::uint64_t init_seed = 1;

  std::vector<UpdateUnitConfig> schedule() const { return make_schedule(num_gru, num_sru, m, hidden_channels); }
};

/// Everything one forward pass produces, at the input's resolution.
struct StereoPrediction {
  ag::Var d_init;       // quarter resolution
  ag::Var d_init_full;  // cropped to the input size
  std::vector<RefinementStep> steps;
  int height = 0, width = 0;

  const ag::Var& final_full() const { return steps.empty() ? d_init_full : steps.back().d_full; }
};

/// Encoders, cost volume, one shared recurrent core and the two unit kinds.
/// Not copyable: its layers refer to the parameter store it owns.
class StereoModel {
 public:
  explicit StereoModel(const ModelConfig& cfg);
  StereoModel(const StereoModel&) = delete;
  StereoModel& operator=(const StereoModel&) = delete;

  const ModelConfig& config() const { return cfg_; }
  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }

  /// `levels` is the quarter-resolution disparity count of the cost volume.
  StereoPrediction forward(const Image& left, const Image& right, int levels) const;
  /// Runs with the configured schedule but without recording gradients.
  DisparityMap predict(const Image& left, const Image& right, int levels) const;

  const FeatureEncoder& feature_encoder() const { return fnet_; }
  const UpdateCore& core() const { return core_; }
  const StepwiseUnit& stepwise_unit() const { return sru_; }
  const DisparityUpsampler& upsampler() const { return up_; }

 private:
  ModelConfig cfg_;
  ParameterStore params_;
  FeatureEncoder fnet_, cnet_;
  UpdateCore core_;
  StepwiseUnit sru_;
  std::unique_ptr<GruResidualUnit> gru_;
  DisparityUpsampler up_;
  std::vector<const UpdateUnit*> units_;
};

/// Temporarily marks a store's parameters as constants (inference).
class NoGradGuard {
 public:
  explicit NoGradGuard(ParameterStore& store);
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  ParameterStore& store_;
  std::vector<bool> saved_;
};

}  // namespace srstereo
