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

#include "srstereo/train.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "srstereo/metrics.hpp"

namespace srstereo {

TrainingSample make_training_sample(const StereoSample& s, double d_max, std::string name, std::string domain) {
  TrainingSample t;
  t.name = std::move(name);
  t.domain = std::move(domain);
  t.left = s.left;
  t.right = s.right;
  t.gt = s.disparity_gt;
  t.occlusion = s.occlusion;
  t.edge_gt = edge_mask(edge_gt_extract(s.disparity_gt));
  t.levels = disparity_levels(d_max);
  return t;
}

SampleLoss stereo_loss(const StereoModel& model, const TrainingSample& sample, const LossConfig& cfg) {
  SampleLoss out;
  out.prediction = model.forward(sample.left, sample.right, sample.levels);
  const auto& p = out.prediction;
  const auto targets = build_targets(sample.gt, p.d_init.value(), p.d_init_full.value(), p.steps);
  out.loss = assemble_loss(p.d_init_full, sample.gt, p.steps, targets, cfg);
  return out;
}

std::vector<std::size_t> sample_order(std::size_t dataset_size, int draws, std::uint64_t seed) {
  require(dataset_size > 0, "training: empty dataset");
  Rng rng(mix_seed(seed, 0x0de5));
  std::vector<std::size_t> order(static_cast<std::size_t>(std::max(draws, 0)));
  for (auto& i : order) i = static_cast<std::size_t>(rng() % dataset_size);
  return order;
}

namespace {

double clip_saturation(const StereoPrediction& p) {
  std::size_t n = 0, hit = 0;
  for (const auto& s : p.steps) {
    if (s.kind != UnitKind::kStepwise || !s.m) continue;
    const double lim = 0.99 * ClipBound(*s.m).quarter_limit();
    const Tensor& d = s.delta.value();
    for (std::size_t i = 0; i < d.size(); ++i) hit += std::abs(d[i]) > lim;
    n += d.size();
  }
  return n ? static_cast<double>(hit) / static_cast<double>(n) : 0.0;
}

void validate_optim(const OptimConfig& o) {
  require(o.steps >= 0, "optimizer: steps must be non-negative");
  require(o.batch >= 1, "optimizer: batch must be at least 1");
  require(o.learning_rate > 0.0, "optimizer: learning rate must be positive");
}

// Shared loop of pre-training and fine-tuning. `edge_term` may add an extra
// scalar loss for a sample; it returns an empty Var to add nothing.
template <class EdgeTerm>
std::vector<TrainLogRow> stereo_loop(StereoModel& model, const std::vector<TrainingSample>& data,
                                     const OptimConfig& optim, const LossConfig& loss, EdgeTerm edge_term,
                                     const StepCallback& on_step) {
  validate_optim(optim);
  loss.validate();
  AdamW opt(model.parameters(), optim.adamw);
  const OneCycleSchedule sched(optim.learning_rate, std::max(optim.steps, 1));
  const auto order = sample_order(data.size(), optim.steps * optim.batch, optim.seed);
  std::vector<TrainLogRow> log;
  for (int step = 0; step < optim.steps; ++step) {
    TrainLogRow row;
    row.step = step;
    row.lr = sched.at(step);
    model.parameters().zero_grad();
    for (int b = 0; b < optim.batch; ++b) {
      const std::size_t idx = order[static_cast<std::size_t>(step) * optim.batch + b];
      const TrainingSample& s = data[idx];
      SampleLoss sl = stereo_loss(model, s, loss);
      ag::Var total = sl.loss.total;
      if (ag::Var e = edge_term(idx, sl.prediction)) {
        row.loss_edge += e.item();
        total = ag::sum_scalars({total, e});
      }
      row.loss_init += sl.loss.init;
      row.loss_delta += sl.loss.delta;
      row.loss_full += sl.loss.full;
      row.total += total.item();
      row.epe_train += epe(sl.prediction.final_full().value(), s.gt);
      row.clip_saturation += clip_saturation(sl.prediction);
      ag::backward(total);
    }
    const double inv = 1.0 / optim.batch;
    for (double* v : {&row.loss_init, &row.loss_delta, &row.loss_full, &row.loss_edge, &row.total, &row.epe_train,
                      &row.clip_saturation})
      *v *= inv;
    opt.step(row.lr, inv);
    if (on_step) on_step(row);
    log.push_back(row);
  }
  return log;
}

}  // namespace

std::vector<TrainLogRow> train_stereo(StereoModel& model, const std::vector<TrainingSample>& data,
                                      const OptimConfig& optim, const LossConfig& loss, const StepCallback& on_step) {
  return stereo_loop(
      model, data, optim, loss, [](std::size_t, const StereoPrediction&) { return ag::Var(); }, on_step);
}

std::vector<Tensor> predict_all(const StereoModel& model, const std::vector<TrainingSample>& data) {
  std::vector<Tensor> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(model.predict(s.left, s.right, s.levels).values);
  return out;
}

std::vector<ReportRow> evaluate_model(const StereoModel& model, const std::vector<TrainingSample>& data) {
  std::vector<ReportRow> rows;
  for (const auto& s : data) {
    require(s.edge_gt.size() > 0, "evaluate: sample " + s.name + " has no edge gt");
    const Tensor d = model.predict(s.left, s.right, s.levels).values;
    const auto r = flatten(s.name, s.domain, region_split_eval(d, s.gt, s.edge_gt, s.occlusion));
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return rows;
}

std::unique_ptr<StereoModel> clone_model(const StereoModel& model) {
  auto copy = std::make_unique<StereoModel>(model.config());
  copy->parameters().copy_values_from(model.parameters());
  return copy;
}

std::vector<TrainLogRow> train_edge_estimator(EdgeEstimator& estimator, const StereoModel& model,
                                              const std::vector<TrainingSample>& data, const OptimConfig& optim,
                                              const StepCallback& on_step) {
  validate_optim(optim);
  for (const auto& s : data) require(s.edge_gt.size() > 0, "train_edge_estimator: sample " + s.name + " has no edge gt");
  const auto preds = predict_all(model, data);
  std::vector<EdgeMap> targets;
  for (const auto& s : data) {
    Tensor t(1, s.edge_gt.height(), s.edge_gt.width());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = s.edge_gt[i] ? 1.0 : 0.0;
    targets.push_back({std::move(t), EdgeKind::kBinaryGt});
  }
  AdamW opt(estimator.parameters(), optim.adamw);
  const OneCycleSchedule sched(optim.learning_rate, std::max(optim.steps, 1));
  const auto order = sample_order(data.size(), optim.steps * optim.batch, mix_seed(optim.seed, 0xed9e));
  std::vector<TrainLogRow> log;
  for (int step = 0; step < optim.steps; ++step) {
    TrainLogRow row;
    row.step = step;
    row.lr = sched.at(step);
    estimator.parameters().zero_grad();
    for (int b = 0; b < optim.batch; ++b) {
      const std::size_t idx = order[static_cast<std::size_t>(step) * optim.batch + b];
      ag::Var e = estimator.forward(ag::constant(preds[idx]), data[idx].left);
      ag::Var l = edge_loss(e, targets[idx]).loss;
      row.loss_edge += l.item() / optim.batch;
      ag::backward(l);
    }
    row.total = row.loss_edge;
    opt.step(row.lr, 1.0 / optim.batch);
    if (on_step) on_step(row);
    log.push_back(row);
  }
  return log;
}

std::vector<EdgeMap> predict_target_edges(const StereoModel& model, const EdgeEstimator& estimator,
                                          const std::vector<TrainingSample>& data) {
  const auto preds = predict_all(model, data);
  std::vector<EdgeMap> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out.push_back(estimator.estimate(preds[i], data[i].left));
  return out;
}

PseudoLabelCache select_pseudo_labels(const std::vector<EdgeMap>& edges, double t, std::string source_checkpoint) {
  PseudoLabelCache c;
  c.threshold = t;
  c.source_checkpoint = std::move(source_checkpoint);
  c.labels.reserve(edges.size());
  for (const auto& e : edges) c.labels.push_back(pseudo_label_select(e, t));
  return c;
}

DapeResult dape_finetune(StereoModel& model, const std::vector<TrainingSample>& target, const PseudoLabelCache* cache,
                         const DapeConfig& cfg, const StepCallback& on_step) {
  require(cache != nullptr, "dape_finetune: pseudo-label cache is missing");
  require(cache->labels.size() == target.size(),
          "dape_finetune: cache holds " + std::to_string(cache->labels.size()) + " labels for " +
              std::to_string(target.size()) + " samples");
  require(cfg.edge_weight >= 0.0, "dape_finetune: edge weight must be non-negative");
  for (std::size_t i = 0; i < target.size(); ++i)
    require(cache->labels[i].values.height() == target[i].left.height() &&
                cache->labels[i].values.width() == target[i].left.width(),
            "dape_finetune: pseudo-label shape mismatch for sample " + target[i].name);
  DapeResult r;
  auto term = [&](std::size_t idx, const StereoPrediction& p) -> ag::Var {
    if (cfg.edge_weight == 0.0) return {};
    const EdgeLoss e = edge_loss(soft_edge_of_disparity(p.final_full()), cache->labels[idx]);
    if (e.empty) {
      ++r.empty_label_steps;
      return {};
    }
    ++r.steps_with_edge_term;
    return ag::scale(e.loss, cfg.edge_weight);
  };
  r.log = stereo_loop(model, target, cfg.optim, cfg.loss, term, on_step);
  return r;
}

DapeResult finetune_plain(StereoModel& model, const std::vector<TrainingSample>& target, const DapeConfig& cfg,
                          const StepCallback& on_step) {
  DapeResult r;
  r.log = train_stereo(model, target, cfg.optim, cfg.loss, on_step);
  return r;
}

std::string training_csv(const std::vector<TrainLogRow>& rows) {
  std::ostringstream out;
  out << "step,lr,loss_init,loss_delta,loss_full,loss_edge,total,epe_train,clip_saturation\n";
  out << std::setprecision(9);
  for (const auto& r : rows)
    out << r.step << ',' << r.lr << ',' << r.loss_init << ',' << r.loss_delta << ',' << r.loss_full << ','
        << r.loss_edge << ',' << r.total << ',' << r.epe_train << ',' << r.clip_saturation << '\n';
  return out.str();
}

}  // namespace srstereo
