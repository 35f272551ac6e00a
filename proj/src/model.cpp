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

#include "srstereo/model.hpp"

namespace srstereo {

StereoModel::StereoModel(const ModelConfig& cfg) : cfg_(cfg) {
  const auto schedule = cfg_.schedule();  // validates
  Rng rng(cfg_.init_seed);
  fnet_ = FeatureEncoder(params_, "fnet", 3, cfg_.feature_channels, rng);
  cnet_ = FeatureEncoder(params_, "cnet", 3, cfg_.context_channels, rng);
  core_ = UpdateCore(params_, "update", cfg_.hidden_channels, cfg_.context_channels, rng);
  sru_ = StepwiseUnit(params_, "stepwise", core_, ClipBound(cfg_.m), rng);
  gru_ = std::make_unique<GruResidualUnit>(core_);
  up_ = DisparityUpsampler(params_, "upsample", cfg_.upsample, cfg_.feature_channels, rng);
  for (const auto& u : schedule)
    units_.push_back(u.kind == UnitKind::kStepwise ? static_cast<const UpdateUnit*>(&sru_) : gru_.get());
}

StereoPrediction StereoModel::forward(const Image& left, const Image& right, int levels) const {
  require(left.same_shape(right) && left.channels() == 3, "forward: left/right must be equal-size RGB images");
  const ag::Var l = ag::constant(pad_to_multiple(left, kDownsample));
  const ag::Var r = ag::constant(pad_to_multiple(right, kDownsample));
  const ag::Var f_left = fnet_(l);
  const ag::Var f_right = fnet_(r);
  const ContextFeatures ctx = core_.prepare_context(ag::relu(cnet_(l)));
  const CostVolume volume = build_cost_volume(f_left, f_right, levels);

  StereoPrediction p;
  p.height = left.height();
  p.width = left.width();
  p.d_init = initial_disparity(volume, cfg_.temperature);
  p.d_init_full = ag::crop(up_(p.d_init, f_left), p.height, p.width);
  RefinementInputs in{&volume, &ctx, f_left, p.d_init, &up_};
  p.steps = run_refinement(in, units_);
  for (auto& s : p.steps) s.d_full = ag::crop(s.d_full, p.height, p.width);
  return p;
}

DisparityMap StereoModel::predict(const Image& left, const Image& right, int levels) const {
  NoGradGuard guard(const_cast<ParameterStore&>(params_));
  StereoPrediction p = forward(left, right, levels);
  return DisparityMap::dense(p.final_full().value());
}

NoGradGuard::NoGradGuard(ParameterStore& store) : store_(store) {
  for (auto& e : store_.entries()) {
    saved_.push_back(e.var.node()->requires_grad);
    e.var.node()->requires_grad = false;
  }
}

NoGradGuard::~NoGradGuard() {
  auto& entries = store_.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].var.node()->requires_grad = saved_[i];
}

}  // namespace srstereo
