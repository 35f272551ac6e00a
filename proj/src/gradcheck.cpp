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

#include "srstereo/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "srstereo/backbone.hpp"
#include "srstereo/edge.hpp"
#include "srstereo/regression.hpp"

namespace srstereo {

InstanceCheck check_gradients(GradcheckProblem& problem, const GradcheckConfig& cfg, Rng& rng) {
  for (auto& leaf : problem.leaves) leaf.zero_grad();
  ag::Var root = problem.loss();
  ag::backward(root);
  const double e = cfg.step;

  InstanceCheck out;
  double max_diff = 0.0, scale = 1e-8;
  for (auto& leaf : problem.leaves) {
    const Tensor analytic = leaf.grad().empty() ? Tensor(leaf.value().channels(), leaf.value().height(),
                                                         leaf.value().width())
                                                : leaf.grad();
    Tensor& x = leaf.mutable_value();
    const std::size_t n = x.size();
    const int picks = std::min<int>(cfg.coords_per_leaf, static_cast<int>(n));
    for (int k = 0; k < picks; ++k) {
      const std::size_t i = static_cast<std::size_t>(rng() % n);
      const double x0 = x[i];
      auto f = [&](double offset) {
        x[i] = x0 + offset;
        return problem.loss().item();
      };
      const double f0 = f(0.0), fp = f(e), fm = f(-e);
      // Second differences of a smooth function scale linearly with the step.
      const double g1 = (fp - 2.0 * f0 + fm) / e;
      const double g2 = (f(e / 2) - 2.0 * f0 + f(-e / 2)) / (e / 2);
      const double g4 = (f(e / 4) - 2.0 * f0 + f(-e / 4)) / (e / 4);
      x[i] = x0;
      const double bound = cfg.kink_tolerance * (std::abs(fp - fm) / (2.0 * e) + 1e-3);
      if (std::abs(g1 - 2.0 * g2) > bound || std::abs(g2 - 2.0 * g4) > bound) {
        ++out.skipped;
        continue;
      }
      const double numeric = (fp - fm) / (2.0 * e);
      max_diff = std::max(max_diff, std::abs(analytic[i] - numeric));
      scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric)});
      ++out.checked;
    }
  }
  out.rel_error = max_diff / scale;
  return out;
}

namespace {

Tensor uniform(int c, int h, int w, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(c, h, w);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = u(rng);
  return t;
}

Tensor normal(int c, int h, int w, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Tensor t(c, h, w);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = g(rng);
  return t;
}

// Re-draws every parameter (including zero-initialised heads) so that all
// paths carry gradient. Weights get fan-in scaled Gaussians, biases a small
// fixed spread.
void randomize(ParameterStore& store, Rng& rng) {
  for (auto& e : store.entries()) {
    Tensor& v = e.var.mutable_value();
    const bool bias = e.name.size() >= 5 && e.name.compare(e.name.size() - 5, 5, ".bias") == 0;
    std::normal_distribution<double> g(0.0, bias ? 0.1 : 1.0 / std::sqrt(static_cast<double>(v.height() * v.width())));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = g(rng);
  }
}

void add_parameters(GradcheckProblem& p, ParameterStore& store) {
  for (auto& e : store.entries()) p.leaves.push_back(e.var);
}

// Module instances must outlive the problem's closure.
struct Holder {
  ParameterStore store;
  FeatureEncoder encoder;
  UpdateCore core;
  StepwiseUnit unit;
  DisparityUpsampler upsampler;
  std::unique_ptr<EdgeEstimator> edge;
};

using Builder = std::function<GradcheckProblem(Rng&, std::shared_ptr<Holder>&)>;

GradcheckProblem encode_features(Rng& rng, std::shared_ptr<Holder>& h) {
  h->encoder = FeatureEncoder(h->store, "enc", 3, 6, rng);
  randomize(h->store, rng);
  GradcheckProblem p;
  ag::Var img = ag::leaf(uniform(3, 8, 12, 0.0, 1.0, rng));
  const Tensor w = normal(6, 2, 3, rng);
  p.leaves = {img};
  add_parameters(p, h->store);
  p.loss = [h, img, w] { return ag::weighted_sum(h->encoder(img), w); };
  return p;
}

GradcheckProblem build_cost_volume_op(Rng& rng, std::shared_ptr<Holder>&) {
  GradcheckProblem p;
  ag::Var fl = ag::leaf(normal(5, 3, 9, rng)), fr = ag::leaf(normal(5, 3, 9, rng));
  const Tensor wc = normal(5, 3, 9, rng), wp = normal(2, 3, 9, rng);
  p.leaves = {fl, fr};
  p.loss = [fl, fr, wc, wp] {
    const CostVolume v = build_cost_volume(fl, fr, 5);
    return ag::add(ag::weighted_sum(v.cost, wc), ag::weighted_sum(v.pooled, wp));
  };
  return p;
}

GradcheckProblem lookup_op(Rng& rng, std::shared_ptr<Holder>&) {
  GradcheckProblem p;
  ag::Var cost = ag::leaf(normal(8, 3, 5, rng));
  // Fractional parts kept away from the sampling grid at both levels.
  std::uniform_real_distribution<double> frac(0.2, 0.8);
  std::uniform_int_distribution<int> whole(0, 3);
  Tensor d(1, 3, 5);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = 2.0 * whole(rng) + frac(rng);
  ag::Var disp = ag::leaf(d);
  const Tensor w = normal(kLookupChannels, 3, 5, rng);
  p.leaves = {cost, disp};
  p.loss = [cost, disp, w] {
    const CostVolume v{cost, ag::pool_disparity(cost)};
    return ag::weighted_sum(lookup(v, disp), w);
  };
  return p;
}

GradcheckProblem initial_disparity_op(Rng& rng, std::shared_ptr<Holder>&) {
  GradcheckProblem p;
  ag::Var cost = ag::leaf(uniform(7, 3, 4, -1.0, 1.0, rng));
  const Tensor w = normal(1, 3, 4, rng);
  p.leaves = {cost};
  p.loss = [cost, w] {
    const CostVolume v{cost, ag::pool_disparity(cost)};
    return ag::weighted_sum(initial_disparity(v, 0.1), w);
  };
  return p;
}

GradcheckProblem stepwise_update_op(Rng& rng, std::shared_ptr<Holder>& h) {
  const int hc = 4, cc = 4, H = 3, W = 4;
  h->core = UpdateCore(h->store, "core", hc, cc, rng);
  h->unit = StepwiseUnit(h->store, "sru", h->core, ClipBound(2.0), rng);
  randomize(h->store, rng);
  GradcheckProblem p;
  ag::Var hidden = ag::leaf(uniform(hc, H, W, -0.9, 0.9, rng));
  ag::Var flook = ag::leaf(normal(kLookupChannels, H, W, rng));
  ag::Var ctx = ag::leaf(normal(cc, H, W, rng));
  const ag::Var d = ag::constant(uniform(1, H, W, 4.0, 8.0, rng));
  const Tensor wd = normal(1, H, W, rng), wq = normal(1, H, W, rng), wh = normal(hc, H, W, rng);
  p.leaves = {hidden, flook, ctx};
  add_parameters(p, h->store);
  p.loss = [h, hidden, flook, ctx, d, wd, wq, wh] {
    const ContextFeatures cf = h->core.prepare_context(ctx);
    const UnitOutput o = stepwise_update(h->unit, UpdateState{hidden, d, 0}, flook, cf);
    return ag::sum_scalars({ag::weighted_sum(o.delta, wd), ag::weighted_sum(o.state.d_quarter, wq),
                            ag::weighted_sum(o.state.hidden, wh)});
  };
  return p;
}

GradcheckProblem upsample_op(Rng& rng, std::shared_ptr<Holder>& h, UpsampleMode mode) {
  const int C = 4, H = 3, W = 4;
  h->upsampler = DisparityUpsampler(h->store, "up", mode, C, rng);
  randomize(h->store, rng);
  GradcheckProblem p;
  ag::Var d = ag::leaf(uniform(1, H, W, 0.0, 6.0, rng));
  ag::Var f = ag::leaf(normal(C, H, W, rng));
  const Tensor w = normal(1, H * kDownsample, W * kDownsample, rng);
  p.leaves = {d};
  if (mode == UpsampleMode::kConvex) {
    p.leaves.push_back(f);
    add_parameters(p, h->store);
  }
  p.loss = [h, d, f, w] { return ag::weighted_sum(h->upsampler(d, f), w); };
  return p;
}

GradcheckProblem edge_estimate_op(Rng& rng, std::shared_ptr<Holder>& h) {
  h->edge = std::make_unique<EdgeEstimator>(EdgeEstimatorConfig{false, rng()});
  randomize(h->edge->parameters(), rng);
  GradcheckProblem p;
  ag::Var d = ag::leaf(uniform(1, 6, 7, 0.0, 4.0, rng));
  const Image rgb = uniform(3, 6, 7, 0.0, 1.0, rng);
  const Tensor w = normal(1, 6, 7, rng);
  p.leaves = {d};
  add_parameters(p, h->edge->parameters());
  p.loss = [h, d, rgb, w] { return ag::weighted_sum(h->edge->forward(d, rgb), w); };
  return p;
}

GradcheckProblem soft_edge_op(Rng& rng, std::shared_ptr<Holder>&) {
  GradcheckProblem p;
  // Noisy ramps whose Prewitt magnitude sits near the threshold, so the
  // sigmoid is neither saturated nor flat.
  std::uniform_real_distribution<double> slope(0.6, 1.1), noise(-0.15, 0.15);
  const double s = slope(rng);
  Tensor v(1, 6, 7);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 7; ++x) v.at(0, y, x) = s * x + noise(rng);
  ag::Var d = ag::leaf(std::move(v));
  const Tensor w = normal(1, 6, 7, rng);
  p.leaves = {d};
  p.loss = [d, w] { return ag::weighted_sum(soft_edge_of_disparity(d), w); };
  return p;
}

GradcheckProblem cb_loss_op(Rng& rng, std::shared_ptr<Holder>&, ag::LossKind kind) {
  GradcheckProblem p;
  ag::Var pred = ag::leaf(uniform(1, 5, 6, -3.0, 3.0, rng));
  const Tensor target = uniform(1, 5, 6, -3.0, 3.0, rng);
  Mask valid(5, 6);
  for (std::size_t i = 0; i < valid.size(); ++i) valid.set(i, rng() % 4 != 0);
  valid.set(0, true);
  p.leaves = {pred};
  p.loss = [pred, target, valid, kind] { return ag::masked_loss(pred, target, valid, kind, 0.5); };
  return p;
}

const std::vector<std::pair<std::string, Builder>>& registry() {
  static const std::vector<std::pair<std::string, Builder>> ops = {
      {"encode_features", encode_features},
      {"build_cost_volume", build_cost_volume_op},
      {"lookup", lookup_op},
      {"initial_disparity", initial_disparity_op},
      {"stepwise_update", stepwise_update_op},
      {"upsample_bilinear",
       [](Rng& r, std::shared_ptr<Holder>& h) { return upsample_op(r, h, UpsampleMode::kBilinear); }},
      {"upsample_convex", [](Rng& r, std::shared_ptr<Holder>& h) { return upsample_op(r, h, UpsampleMode::kConvex); }},
      {"edge_estimate", edge_estimate_op},
      {"soft_edge_of_disparity", soft_edge_op},
      {"cb_l1", [](Rng& r, std::shared_ptr<Holder>& h) { return cb_loss_op(r, h, ag::LossKind::kL1); }},
      {"cb_smooth_l1", [](Rng& r, std::shared_ptr<Holder>& h) { return cb_loss_op(r, h, ag::LossKind::kSmoothL1); }},
  };
  return ops;
}

}  // namespace

const std::vector<std::string>& gradcheck_ops() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, _] : registry()) n.push_back(name);
    return n;
  }();
  return names;
}

GradcheckReport run_gradcheck(const std::string& op, const GradcheckConfig& cfg) {
  const auto& ops = registry();
  auto it = std::find_if(ops.begin(), ops.end(), [&](const auto& e) { return e.first == op; });
  require(it != ops.end(), "gradcheck: unknown operation '" + op + "'");
  require(cfg.instances >= 1 && cfg.step > 0.0, "gradcheck: need at least one instance and a positive step");
  GradcheckReport report;
  report.op = op;
  const auto salt = static_cast<std::uint64_t>(it - ops.begin());
  for (int k = 0; k < cfg.instances; ++k) {
    Rng rng(mix_seed(cfg.seed, (salt << 32) + static_cast<std::uint64_t>(k)));
    auto holder = std::make_shared<Holder>();
    GradcheckProblem problem = it->second(rng, holder);
    const InstanceCheck c = check_gradients(problem, cfg, rng);
    ++report.instances;
    report.coords_checked += c.checked;
    report.coords_skipped += c.skipped;
    report.worst_rel_error = std::max(report.worst_rel_error, c.rel_error);
    if (c.rel_error >= cfg.tolerance || c.checked == 0) ++report.failed;
  }
  return report;
}

std::vector<GradcheckReport> run_gradcheck_suite(const GradcheckConfig& cfg) {
  std::vector<GradcheckReport> out;
  for (const auto& op : gradcheck_ops()) out.push_back(run_gradcheck(op, cfg));
  return out;
}

}  // namespace srstereo
