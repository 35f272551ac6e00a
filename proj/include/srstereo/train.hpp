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

// Training loops: stereo pre-training, edge estimator training on top of a
// stereo model, and fine-tuning with optional edge pseudo-label loss.
//
// Training log CSV columns:
//   step,lr,loss_init,loss_delta,loss_full,loss_edge,total,epe_train,clip_saturation

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "srstereo/edge.hpp"
#include "srstereo/metrics.hpp"
#include "srstereo/model.hpp"
#include "srstereo/scene.hpp"

namespace srstereo {

struct TrainingSample {
  std::string name;
  std::string domain;
  Image left, right;
  DisparityMap gt;  // may be sparse
  Mask occlusion;
  Mask edge_gt;     // binary edges of the dense gt (empty when unknown)
  int levels = 0;   // quarter-resolution cost volume size
};

/// Builds a sample from a generated scene; levels come from d_max.
TrainingSample make_training_sample(const StereoSample& s, double d_max, std::string name, std::string domain);

struct OptimConfig {
  double learning_rate = 2e-3;
  int steps = 2000;
  int batch = 1;
  std::uint64_t seed = 1;
  AdamWConfig adamw;
};

struct TrainLogRow {
  int step = 0;
  double lr = 0.0;
  double loss_init = 0.0, loss_delta = 0.0, loss_full = 0.0, loss_edge = 0.0, total = 0.0;
  double epe_train = 0.0;
  double clip_saturation = 0.0;  // fraction of clip pixels with |delta| > 0.99 * 1.5m
};

using StepCallback = std::function<void(const TrainLogRow&)>;

/// Stereo loss of one sample plus the prediction it came from.
struct SampleLoss {
  LossBreakdown loss;
  StereoPrediction prediction;
};

SampleLoss stereo_loss(const StereoModel& model, const TrainingSample& sample, const LossConfig& cfg);

/// Order in which training visits samples: uniform draws from seed.
std::vector<std::size_t> sample_order(std::size_t dataset_size, int draws, std::uint64_t seed);

std::vector<TrainLogRow> train_stereo(StereoModel& model, const std::vector<TrainingSample>& data,
                                      const OptimConfig& optim, const LossConfig& loss,
                                      const StepCallback& on_step = {});

/// Trains the estimator to reproduce edge_gt from the (frozen) stereo
/// model's predictions and the left image.
std::vector<TrainLogRow> train_edge_estimator(EdgeEstimator& estimator, const StereoModel& model,
                                              const std::vector<TrainingSample>& data, const OptimConfig& optim,
                                              const StepCallback& on_step = {});

/// Full-resolution stereo predictions of a model, one per sample.
std::vector<Tensor> predict_all(const StereoModel& model, const std::vector<TrainingSample>& data);

/// Region-split report rows of every sample against its gt (dense gt
/// gives the usual evaluation).
std::vector<ReportRow> evaluate_model(const StereoModel& model, const std::vector<TrainingSample>& data);

/// Copies a model's configuration and parameter values.
std::unique_ptr<StereoModel> clone_model(const StereoModel& model);

// ---- Domain adaptation ----------------------------------------------------

struct PseudoLabelCache {
  double threshold = 0.25;
  std::string source_checkpoint;  // hash of the model that produced the labels
  std::vector<PseudoLabel> labels;
};

/// Edge maps predicted from a model's target-domain disparities. Computed
/// once and reused for every threshold.
std::vector<EdgeMap> predict_target_edges(const StereoModel& model, const EdgeEstimator& estimator,
                                          const std::vector<TrainingSample>& data);

PseudoLabelCache select_pseudo_labels(const std::vector<EdgeMap>& edges, double t, std::string source_checkpoint);

struct DapeConfig {
  OptimConfig optim;
  LossConfig loss;
  double edge_weight = 1.0;
};

struct DapeResult {
  std::vector<TrainLogRow> log;
  int steps_with_edge_term = 0;
  int empty_label_steps = 0;  // steps whose sample had no valid pseudo-label
};

/// Fine-tunes on sparse target gt. With a cache the per-step loss adds
/// edge_weight * edge_loss(soft_edge(d_pred), label); the edge estimator
/// itself is not touched. A null cache is rejected: callers wanting the
/// plain control use finetune_plain.
DapeResult dape_finetune(StereoModel& model, const std::vector<TrainingSample>& target, const PseudoLabelCache* cache,
                         const DapeConfig& cfg, const StepCallback& on_step = {});

DapeResult finetune_plain(StereoModel& model, const std::vector<TrainingSample>& target, const DapeConfig& cfg,
                          const StepCallback& on_step = {});

std::string training_csv(const std::vector<TrainLogRow>& rows);

}  // namespace srstereo
