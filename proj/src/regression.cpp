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

#include "srstereo/regression.hpp"

#include <cmath>

namespace srstereo {

std::string to_string(UnitKind kind) { return kind == UnitKind::kStepwise ? "stepwise" : "gru_residual"; }

std::vector<UpdateUnitConfig> make_schedule(int num_gru, int num_sru, double m, int hidden_channels) {
  require(num_gru >= 0 && num_sru >= 0, "make_schedule: negative unit count");
  std::vector<UpdateUnitConfig> s;
  for (int i = 0; i < num_gru; ++i) s.push_back({UnitKind::kGruResidual, std::nullopt, hidden_channels});
  for (int i = 0; i < num_sru; ++i) s.push_back({UnitKind::kStepwise, m, hidden_channels});
  validate_schedule(s);
  return s;
}

void validate_schedule(const std::vector<UpdateUnitConfig>& schedule) {
  require(!schedule.empty(), "unit schedule is empty");
  bool seen_stepwise = false;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& u = schedule[i];
    if (u.kind == UnitKind::kStepwise) {
      require(u.m.has_value() && *u.m > 0.0, "stepwise unit " + std::to_string(i) + " needs a positive m");
      seen_stepwise = true;
    } else {
      require(!seen_stepwise, "residual unit " + std::to_string(i) +
                                  " follows a stepwise unit; residual units must come first");
    }
  }
}

void LossConfig::validate() const {
  require(gamma > 0.0 && gamma < 1.0, "LossConfig: gamma must lie in (0, 1)");
  require(h >= 0.0, "LossConfig: h must be non-negative");
  require(iterations >= 1, "LossConfig: need at least one iteration");
}

namespace {
constexpr int kHeadChannels = 16;
constexpr int kWeightChannels = 8;
}  // namespace

UpdateCore::UpdateCore(ParameterStore& store, const std::string& name, int hidden_channels, int context_channels,
                       Rng& rng)
    : hidden_(hidden_channels) {
  const int x_ch = hidden_channels + 1;  // motion features + disparity
  hidden_init_ = make_conv(store, name + ".hidden_init", context_channels, hidden_channels, 1, 1, rng);
  gate_bias_ = make_conv(store, name + ".gate_bias", context_channels, 3 * hidden_channels, 3, 1, rng);
  motion_ = make_conv(store, name + ".motion", kLookupChannels + 1, hidden_channels, 3, 1, rng);
  gates_zr_ = make_conv(store, name + ".gates_zr", hidden_channels + x_ch, 2 * hidden_channels, 3, 1, rng,
                        Init::kOrthogonal);
  gate_q_ = make_conv(store, name + ".gate_q", hidden_channels + x_ch, hidden_channels, 3, 1, rng, Init::kOrthogonal);
  head1_ = make_conv(store, name + ".head1", hidden_channels, kHeadChannels, 3, 1, rng);
  head2_ = make_conv(store, name + ".head2", kHeadChannels, 1, 3, 1, rng, Init::kZero);
}

ContextFeatures UpdateCore::prepare_context(const ag::Var& context) const {
  ContextFeatures c;
  c.hidden0 = ag::tanh(hidden_init_(context));
  ag::Var b = gate_bias_(context);
  c.bias_z = ag::slice_channels(b, 0, hidden_);
  c.bias_r = ag::slice_channels(b, hidden_, hidden_);
  c.bias_q = ag::slice_channels(b, 2 * hidden_, hidden_);
  return c;
}

UpdateCore::Output UpdateCore::step(const ag::Var& hidden, const ag::Var& f_lookup, const ag::Var& d_prev,
                                    const ContextFeatures& ctx) const {
  ag::Var motion = ag::relu(motion_(ag::concat({f_lookup, d_prev})));
  ag::Var x = ag::concat({motion, d_prev});
  ag::Var zr = gates_zr_(ag::concat({hidden, x}));
  ag::Var z = ag::sigmoid(ag::add(ag::slice_channels(zr, 0, hidden_), ctx.bias_z));
  ag::Var r = ag::sigmoid(ag::add(ag::slice_channels(zr, hidden_, hidden_), ctx.bias_r));
  ag::Var q = ag::tanh(ag::add(gate_q_(ag::concat({ag::mul(r, hidden), x})), ctx.bias_q));
  ag::Var h = ag::add(hidden, ag::mul(z, ag::sub(q, hidden)));
  return {h, head2_(ag::relu(head1_(h)))};
}

UnitOutput GruResidualUnit::update(const UpdateState& state, const ag::Var& f_lookup,
                                   const ContextFeatures& ctx) const {
  const ag::Var d_prev = ag::detach(state.d_quarter);
  auto core = core_->step(state.hidden, f_lookup, d_prev, ctx);
  UnitOutput out;
  out.delta = core.raw_delta;
  out.state = {core.hidden, ag::clamp_min(ag::add(d_prev, out.delta), 0.0), state.step + 1};
  return out;
}

StepwiseUnit::StepwiseUnit(ParameterStore& store, const std::string& name, const UpdateCore& core, ClipBound m,
                           Rng& rng)
    : core_(&core), m_(m.value()) {
  res_ = make_resblock(store, name + ".weight_res", kLookupChannels, kWeightChannels, rng);
  proj_ = make_conv(store, name + ".weight_proj", kWeightChannels, 1, 1, 1, rng);
}

ag::Var StepwiseUnit::weight_map(const ag::Var& f_lookup) const { return ag::sigmoid(proj_(res_(f_lookup))); }

UnitOutput StepwiseUnit::update(const UpdateState& state, const ag::Var& f_lookup, const ContextFeatures& ctx) const {
  const ag::Var d_prev = ag::detach(state.d_quarter);
  auto core = core_->step(state.hidden, f_lookup, d_prev, ctx);
  UnitOutput out;
  out.weight_map = weight_map(f_lookup);
  out.delta = ag::disparity_clip(core.raw_delta, out.weight_map, m_);
  out.state = {core.hidden, ag::clamp_min(ag::add(d_prev, out.delta), 0.0), state.step + 1};
  return out;
}

UnitOutput gru_update(const UpdateCore& core, const UpdateState& state, const ag::Var& f_lookup,
                      const ContextFeatures& ctx) {
  return GruResidualUnit(core).update(state, f_lookup, ctx);
}

UnitOutput stepwise_update(const StepwiseUnit& unit, const UpdateState& state, const ag::Var& f_lookup,
                           const ContextFeatures& ctx) {
  return unit.update(state, f_lookup, ctx);
}

std::vector<RefinementStep> run_refinement(const RefinementInputs& in, const std::vector<const UpdateUnit*>& units) {
  require(!units.empty(), "run_refinement: empty unit schedule");
  bool seen_stepwise = false;
  for (const auto* u : units) {
    if (u->kind() == UnitKind::kStepwise) seen_stepwise = true;
    else require(!seen_stepwise, "run_refinement: residual unit after a stepwise unit");
  }
  std::vector<RefinementStep> steps;
  steps.reserve(units.size());
  UpdateState state{in.context->hidden0, in.d_init, 0};
  for (const auto* unit : units) {
    const ag::Var d_prev = ag::detach(state.d_quarter);
    const ag::Var f_lookup = lookup(*in.volume, d_prev);
    UnitOutput out = unit->update({state.hidden, d_prev, state.step}, f_lookup, *in.context);
    RefinementStep s;
    s.kind = unit->kind();
    s.m = unit->clip_bound();
    s.delta = out.delta;
    s.d_quarter = out.state.d_quarter;
    s.d_full = (*in.upsampler)(out.state.d_quarter, in.f_left);
    s.weight_map = out.weight_map;
    steps.push_back(std::move(s));
    state = out.state;
  }
  return steps;
}

DisparityMap segment_target_full(const DisparityMap& d_gt, const Tensor& d_prev_full, ClipBound m) {
  require(d_prev_full.channels() == 1 && d_prev_full.height() == d_gt.height() &&
              d_prev_full.width() == d_gt.width(),
          "segment_target_full: shape mismatch");
  DisparityMap out = d_gt;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = d_prev_full[i] + clip_symmetric(d_gt.values[i] - d_prev_full[i], m.full_limit());
  return out;
}

ScalarField quarter_ground_truth(const DisparityMap& d_gt, int quarter_height, int quarter_width) {
  const int H = quarter_height * kDownsample, W = quarter_width * kDownsample;
  require(H >= d_gt.height() && W >= d_gt.width() && H - d_gt.height() < kDownsample &&
              W - d_gt.width() < kDownsample,
          "quarter_ground_truth: quarter size does not match the full-resolution map");
  DisparityMap padded(H, W, 0.0, false);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const int sy = std::min(y, d_gt.height() - 1), sx = std::min(x, d_gt.width() - 1);
      padded.at(y, x) = d_gt.at(sy, sx);
      padded.valid.set(y, x, y == sy && x == sx && d_gt.valid.at(sy, sx));
    }
  Tensor v = resize_bilinear(padded.values, quarter_height, quarter_width);
  ScalarField out(quarter_height, quarter_width, 0.0, false);
  for (int y = 0; y < quarter_height; ++y)
    for (int x = 0; x < quarter_width; ++x) {
      // With a x4 ratio, the half-pixel sampling point 4x + 1.5 blends
      // rows/columns 4x + 1 and 4x + 2 with equal weight.
      const int y0 = kDownsample * y + 1, x0 = kDownsample * x + 1;
      const bool ok = padded.valid.at(y0, x0) && padded.valid.at(y0, x0 + 1) && padded.valid.at(y0 + 1, x0) &&
                      padded.valid.at(y0 + 1, x0 + 1);
      out.at(y, x) = v.at(0, y, x) / kDownsample;
      out.valid.set(y, x, ok);
    }
  return out;
}

ScalarField segment_target_quarter(const ScalarField& quarter_gt, const Tensor& d_prev_quarter, ClipBound m) {
  require(d_prev_quarter.channels() == 1 && d_prev_quarter.height() == quarter_gt.height() &&
              d_prev_quarter.width() == quarter_gt.width(),
          "segment_target_quarter: shape mismatch");
  ScalarField out = quarter_gt;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = clip_symmetric(quarter_gt.values[i] - d_prev_quarter[i], m.quarter_limit());
  return out;
}

std::vector<StepTargets> build_targets(const DisparityMap& d_gt, const Tensor& d_init_quarter,
                                       const Tensor& d_init_full, const std::vector<RefinementStep>& steps) {
  const ScalarField qgt = quarter_ground_truth(d_gt, d_init_quarter.height(), d_init_quarter.width());
  std::vector<StepTargets> out;
  out.reserve(steps.size());
  const Tensor* prev_q = &d_init_quarter;
  const Tensor* prev_full = &d_init_full;
  for (const auto& s : steps) {
    StepTargets t;
    if (s.kind == UnitKind::kStepwise) {
      const ClipBound m(s.m.value());
      t.delta = segment_target_quarter(qgt, *prev_q, m);
      t.full = segment_target_full(d_gt, *prev_full, m);
    } else {
      t.full = d_gt;
    }
    out.push_back(std::move(t));
    prev_q = &s.d_quarter.value();
    prev_full = &s.d_full.value();
  }
  return out;
}

std::vector<double> step_weights(int n, double gamma) {
  std::vector<double> w(n);
  for (int k = 1; k <= n; ++k) w[k - 1] = std::pow(gamma, n - k);
  return w;
}

LossBreakdown assemble_loss(const ag::Var& d_init_full, const DisparityMap& d_gt,
                            const std::vector<RefinementStep>& steps, const std::vector<StepTargets>& targets,
                            const LossConfig& cfg) {
  cfg.validate();
  require(!steps.empty(), "assemble_loss: empty step sequence");
  require(steps.size() == targets.size(), "assemble_loss: " + std::to_string(steps.size()) + " steps but " +
                                              std::to_string(targets.size()) + " targets");
  const int n = static_cast<int>(steps.size());
  const auto weights = step_weights(n, cfg.gamma);

  LossBreakdown out;
  std::vector<ag::Var> terms;
  ag::Var init = ag::masked_loss(d_init_full, d_gt.values, d_gt.valid, ag::LossKind::kSmoothL1, 0.0);
  out.init = init.item();
  terms.push_back(init);
  for (int k = 0; k < n; ++k) {
    const auto& s = steps[k];
    const auto& t = targets[k];
    if (s.kind == UnitKind::kStepwise) {
      if (cfg.supervise_clips) {
        ag::Var l = ag::scale(
            ag::masked_loss(s.delta, t.delta.values, t.delta.valid, ag::LossKind::kSmoothL1, cfg.h), weights[k]);
        out.delta += l.item();
        terms.push_back(l);
      }
      ag::Var l =
          ag::scale(ag::masked_loss(s.d_full, t.full.values, t.full.valid, ag::LossKind::kL1, cfg.h), weights[k]);
      out.full += l.item();
      terms.push_back(l);
    } else {
      ag::Var l =
          ag::scale(ag::masked_loss(s.d_full, t.full.values, t.full.valid, ag::LossKind::kL1, 0.0), weights[k]);
      out.full += l.item();
      terms.push_back(l);
    }
  }
  out.total = ag::sum_scalars(terms);
  return out;
}

}  // namespace srstereo
