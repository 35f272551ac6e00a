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

// Iterative disparity refinement.
//
// Two update units share one recurrent core. The residual unit adds the raw
// head output to the disparity, as classic recurrent refiners do. The
// stepwise unit squashes the same output into a bounded disparity clip,
//
//     clip = tanh(raw / m) * m * (1 + 0.5 w),   w = sigmoid(proj(res(f_G))),
//
// so that no single step can move a pixel by 1.5 m or more at quarter
// resolution. Training targets for the stepwise unit are likewise segmented:
// each step regresses only the clipped part of the remaining error.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "srstereo/backbone.hpp"
#include "srstereo/core_math.hpp"

namespace srstereo {

enum class UnitKind { kGruResidual, kStepwise };

std::string to_string(UnitKind kind);

struct UpdateUnitConfig {
  UnitKind kind = UnitKind::kStepwise;
  std::optional<double> m;  // required for kStepwise
  int hidden_channels = 16;
};

/// Builds a schedule of num_gru residual units followed by num_sru stepwise units.
std::vector<UpdateUnitConfig> make_schedule(int num_gru, int num_sru, double m, int hidden_channels = 16);

/// Throws ContractError for empty schedules, stepwise units without m, or
/// residual units placed after a stepwise unit.
void validate_schedule(const std::vector<UpdateUnitConfig>& schedule);

struct LossConfig {
  double gamma = 0.9;
  double h = 0.5;
  bool supervise_clips = true;
  int iterations = 15;

  void validate() const;
};

struct UpdateState {
  ag::Var hidden;
  ag::Var d_quarter;
  int step = 0;
};

/// Context-derived inputs reused by every update: initial hidden state and
/// per-gate biases.
struct ContextFeatures {
  ag::Var hidden0;
  ag::Var bias_z, bias_r, bias_q;
};

struct UnitOutput {
  UpdateState state;
  ag::Var delta;       // quarter-resolution residual or clip
  ag::Var weight_map;  // stepwise units only
};

/// Convolutional GRU with a motion encoder and a two-layer residual head.
class UpdateCore {
 public:
  UpdateCore() = default;
  UpdateCore(ParameterStore& store, const std::string& name, int hidden_channels, int context_channels, Rng& rng);

  ContextFeatures prepare_context(const ag::Var& context) const;

  struct Output {
    ag::Var hidden;
    ag::Var raw_delta;
  };
  /// `d_prev` must already be detached.
  Output step(const ag::Var& hidden, const ag::Var& f_lookup, const ag::Var& d_prev, const ContextFeatures& ctx) const;

  int hidden_channels() const { return hidden_; }

 private:
  int hidden_ = 0;
  Conv hidden_init_, gate_bias_, motion_, gates_zr_, gate_q_, head1_, head2_;
};

/// Pluggable update unit. Implementations treat the incoming disparity as
/// a constant and clamp the updated disparity at zero.
class UpdateUnit {
 public:
  virtual ~UpdateUnit() = default;
  virtual UnitKind kind() const = 0;
  virtual UnitOutput update(const UpdateState& state, const ag::Var& f_lookup, const ContextFeatures& ctx) const = 0;
  /// Clip ceiling m for stepwise units.
  virtual std::optional<double> clip_bound() const { return std::nullopt; }
};

class GruResidualUnit final : public UpdateUnit {
 public:
  explicit GruResidualUnit(const UpdateCore& core) : core_(&core) {}
  UnitKind kind() const override { return UnitKind::kGruResidual; }
  UnitOutput update(const UpdateState& state, const ag::Var& f_lookup, const ContextFeatures& ctx) const override;

 private:
  const UpdateCore* core_;
};

class StepwiseUnit final : public UpdateUnit {
 public:
  StepwiseUnit() = default;
  StepwiseUnit(ParameterStore& store, const std::string& name, const UpdateCore& core, ClipBound m, Rng& rng);
  UnitKind kind() const override { return UnitKind::kStepwise; }
  UnitOutput update(const UpdateState& state, const ag::Var& f_lookup, const ContextFeatures& ctx) const override;
  std::optional<double> clip_bound() const override { return m_; }

  /// w in (0, 1), computed from the lookup features only.
  ag::Var weight_map(const ag::Var& f_lookup) const;
  void set_bound(ClipBound m) { m_ = m.value(); }

 private:
  const UpdateCore* core_ = nullptr;
  ResBlock res_;
  Conv proj_;
  double m_ = 2.0;
};

/// Convenience wrappers over the two unit kinds.
UnitOutput gru_update(const UpdateCore& core, const UpdateState& state, const ag::Var& f_lookup,
                      const ContextFeatures& ctx);
UnitOutput stepwise_update(const StepwiseUnit& unit, const UpdateState& state, const ag::Var& f_lookup,
                           const ContextFeatures& ctx);

struct RefinementStep {
  UnitKind kind;
  std::optional<double> m;
  ag::Var delta;      // quarter resolution
  ag::Var d_quarter;  // after the update
  ag::Var d_full;     // after upsampling
  ag::Var weight_map;
};

struct RefinementInputs {
  const CostVolume* volume;
  const ContextFeatures* context;
  ag::Var f_left;
  ag::Var d_init;  // quarter resolution
  const DisparityUpsampler* upsampler;
};

/// lookup -> unit -> upsample for every unit in order.
std::vector<RefinementStep> run_refinement(const RefinementInputs& in, const std::vector<const UpdateUnit*>& units);

// ---- Regression objective segments -------------------------------------

/// d_prev + clip(d_gt - d_prev, 6m); invalid gt pixels stay invalid.
DisparityMap segment_target_full(const DisparityMap& d_gt, const Tensor& d_prev_full, ClipBound m);

/// Resize(d_gt) / 4 at the given quarter size. A quarter pixel is valid only
/// when every full-resolution pixel contributing to it is valid.
ScalarField quarter_ground_truth(const DisparityMap& d_gt, int quarter_height, int quarter_width);

/// clip(quarter_gt - d_prev, 1.5m) with quarter_gt from quarter_ground_truth.
ScalarField segment_target_quarter(const ScalarField& quarter_gt, const Tensor& d_prev_quarter, ClipBound m);

struct StepTargets {
  ScalarField delta;  // quarter resolution (stepwise steps only)
  ScalarField full;   // full resolution
};

/// Targets for every step, built from the detached disparities of the
/// previous step (the initial disparity for the first).
std::vector<StepTargets> build_targets(const DisparityMap& d_gt, const Tensor& d_init_quarter,
                                       const Tensor& d_init_full, const std::vector<RefinementStep>& steps);

struct LossBreakdown {
  ag::Var total;
  double init = 0.0;
  double delta = 0.0;
  double full = 0.0;
};

/// gamma^(N-k) for k = 1..N.
std::vector<double> step_weights(int n, double gamma);

/// Smooth-L1 on the initial disparity, clip-balanced Smooth-L1 on the
/// clips of stepwise steps and clip-balanced L1 on every full-resolution
/// prediction. Residual steps are supervised against d_gt directly with a
/// plain L1. Every term is a mean over valid pixels.
LossBreakdown assemble_loss(const ag::Var& d_init_full, const DisparityMap& d_gt,
                            const std::vector<RefinementStep>& steps, const std::vector<StepTargets>& targets,
                            const LossConfig& cfg);

}  // namespace srstereo
