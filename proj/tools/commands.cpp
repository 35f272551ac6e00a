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

#include "commands.hpp"

#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "srstereo/gradcheck.hpp"
#include "srstereo/io.hpp"
#include "srstereo/metrics.hpp"

namespace fs = std::filesystem;

namespace srstereo::cli {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(9) << v;
  return s.str();
}

// Threshold labels used in file names: 0.25 -> "0.25".
std::string tag(double t) {
  std::ostringstream s;
  s << std::setprecision(6) << t;
  return s.str();
}

void prepare(const Context& ctx, const fs::path& dir) {
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    require(ctx.force, "output directory " + dir.string() + " is not empty (use --force)");
    for (const auto& e : fs::directory_iterator(dir)) fs::remove_all(e.path());
  }
  fs::create_directories(dir);
  io::write_text(dir / "config.ini", ctx.config.to_ini());
}

fs::path required_path(const Context& ctx, const std::string& key) {
  const std::string v = ctx.config.get_string(key);
  require(!v.empty(), key + " is required for this command");
  return ctx.resolve(v);
}

std::unique_ptr<StereoModel> load_model(const Context& ctx) {
  const fs::path ckpt = required_path(ctx, "paths.checkpoint");
  require(fs::exists(ckpt), "checkpoint " + ckpt.string() + " does not exist");
  auto model = std::make_unique<StereoModel>(model_config(ctx.config));
  io::load_checkpoint(ckpt, model->parameters());
  return model;
}

// A null log discards progress messages.
std::ostream& log(const Context& ctx) {
  static std::ostream discard(nullptr);
  return ctx.log ? *ctx.log : discard;
}

}  // namespace

fs::path output_root() {
  const char* env = std::getenv(kOutputRootEnv);
  return env && *env ? fs::path(env) : fs::current_path();
}

fs::path Context::resolve(const std::string& path) const {
  const fs::path p(path);
  return p.is_absolute() ? p : root / p;
}

fs::path Context::output_dir(const std::string& fallback) const {
  const std::string v = config.get_string("paths.output");
  return resolve(v.empty() ? fallback : v);
}

void inherit_model_config(RunConfig& config, const fs::path& checkpoint) {
  const fs::path archived = checkpoint.parent_path() / "config.ini";
  if (!fs::exists(archived)) return;
  RunConfig stored = RunConfig::defaults();
  stored.merge_file(archived);
  for (const auto& e : stored.entries())
    if (e.key.rfind("model.", 0) == 0 && !config.is_explicit(e.key)) config.set(e.key, e.value);
}

int cmd_gen_scenes(const Context& ctx) {
  const fs::path out = ctx.output_dir("scenes");
  const auto domains = domain_requests(ctx.config);
  if (fs::exists(out) && !fs::is_empty(out))
    require(ctx.force, "gen-scenes: output directory " + out.string() + " is not empty (use --force)");
  const auto manifest = write_dataset(out, domains, ctx.force);
  io::write_text(out / "config.ini", ctx.config.to_ini());
  log(ctx) << "wrote " << manifest.size() << " samples in " << domains.size() << " domain(s) to " << out.string()
           << '\n';
  return kExitOk;
}

int cmd_train(const Context& ctx) {
  const fs::path out = ctx.output_dir("train");
  const fs::path data_dir = required_path(ctx, "paths.dataset");
  const ModelConfig mcfg = model_config(ctx.config);
  const LossConfig lcfg = loss_config(ctx.config);
  const OptimConfig ocfg = optim_config(ctx.config, "optim");
  StereoModel model(mcfg);  // validates the schedule before any output is written
  const auto data = load_dataset(data_dir, GtUse::kSparseIfAvailable);
  prepare(ctx, out);

  log(ctx) << "training on " << data.size() << " samples, " << ocfg.steps << " steps\n";
  const auto rows = train_stereo(model, data, ocfg, lcfg, [&](const TrainLogRow& r) {
    if ((r.step + 1) % 100 == 0 || r.step + 1 == ocfg.steps)
      log(ctx) << "  step " << r.step + 1 << " loss " << fmt(r.total) << " epe " << fmt(r.epe_train) << '\n';
  });
  io::write_text(out / "train_log.csv", training_csv(rows));
  io::save_checkpoint(out / "model.ckpt", model.parameters());

  const OptimConfig ecfg = optim_config(ctx.config, "edge");
  if (ecfg.steps > 0) {
    EdgeEstimator edge(edge_config(ctx.config));
    log(ctx) << "training edge estimator, " << ecfg.steps << " steps\n";
    const auto erows = train_edge_estimator(edge, model, data, ecfg);
    io::write_text(out / "edge_log.csv", training_csv(erows));
    io::save_checkpoint(out / "edge.ckpt", edge.parameters());
  }
  log(ctx) << "wrote " << (out / "model.ckpt").string() << '\n';
  return kExitOk;
}

int cmd_eval(const Context& ctx) {
  const fs::path out = ctx.output_dir("eval");
  const auto model = load_model(ctx);
  const fs::path data_dir = required_path(ctx, "paths.dataset");
  const auto data = load_dataset(data_dir, GtUse::kDense, ctx.config.get_string("eval.domain"));
  std::unique_ptr<EdgeEstimator> edge;
  if (!ctx.config.get_string("paths.edge_checkpoint").empty()) {
    const fs::path p = required_path(ctx, "paths.edge_checkpoint");
    require(fs::exists(p), "edge checkpoint " + p.string() + " does not exist");
    edge = std::make_unique<EdgeEstimator>(edge_config(ctx.config));
    io::load_checkpoint(p, edge->parameters());
  }
  prepare(ctx, out);

  const bool dump = ctx.config.get_bool("eval.dump_images");
  const long long max_dumps = ctx.config.get_int("eval.max_dumps");
  std::map<std::string, long long> dumped;
  std::vector<ReportRow> rows;
  std::ostringstream f1csv;
  f1csv << "sample,domain,f1,precision,recall\n";
  if (dump) fs::create_directories(out / "images");
  for (const auto& s : data) {
    const Tensor d = model->predict(s.left, s.right, s.levels).values;
    const auto r = flatten(s.name, s.domain, region_split_eval(d, s.gt, s.edge_gt, s.occlusion));
    rows.insert(rows.end(), r.begin(), r.end());
    if (edge) {
      const F1Result f = edge_f1(edge->estimate(d, s.left).values, s.edge_gt, 0.5);
      f1csv << s.name << ',' << s.domain << ',' << (f.f1 ? fmt(*f.f1) : "undefined") << ',' << fmt(f.precision)
            << ',' << fmt(f.recall) << '\n';
    }
    if (dump && dumped[s.domain]++ < max_dumps) {
      double hi = 1.0;
      for (std::size_t i = 0; i < s.gt.values.size(); ++i) hi = std::max(hi, s.gt.values[i]);
      Tensor err(1, d.height(), d.width());
      for (std::size_t i = 0; i < err.size(); ++i) err[i] = std::abs(d[i] - s.gt.values[i]);
      io::write_ppm(out / "images" / (s.name + "_pred.ppm"), io::color_ramp(d, 0.0, hi));
      io::write_ppm(out / "images" / (s.name + "_gt.ppm"), io::color_ramp(s.gt.values, 0.0, hi));
      io::write_ppm(out / "images" / (s.name + "_error.ppm"), io::color_ramp(err, 0.0, 3.0));
    }
  }
  io::write_text(out / "per_sample.csv", per_sample_csv(rows));
  io::write_text(out / "aggregate.csv", aggregate_csv(rows));
  if (edge) io::write_text(out / "edge_f1.csv", f1csv.str());
  for (const auto& a : aggregate(rows))
    if (a.region == "all") log(ctx) << a.domain << ": epe " << fmt(a.epe) << " d1 " << fmt(a.d1) << '\n';
  return kExitOk;
}

int cmd_dape(const Context& ctx) {
  const auto thresholds = parse_real_list(ctx.config.get_string("dape.thresholds"), "dape.thresholds");
  for (double t : thresholds) require(t > 0.0 && t <= 1.0, "dape: threshold " + fmt(t) + " outside (0, 1]");
  const fs::path out = ctx.output_dir("dape");
  const auto model = load_model(ctx);
  const fs::path ckpt = required_path(ctx, "paths.checkpoint");
  const fs::path edge_ckpt = required_path(ctx, "paths.edge_checkpoint");
  require(fs::exists(edge_ckpt), "edge checkpoint " + edge_ckpt.string() + " does not exist");
  EdgeEstimator edge(edge_config(ctx.config));
  io::load_checkpoint(edge_ckpt, edge.parameters());
  const fs::path target_dir = required_path(ctx, "paths.target");
  const auto target = load_dataset(target_dir, GtUse::kSparseIfAvailable);
  const std::string eval_key = ctx.config.get_string("paths.target_eval");
  const auto held_out = load_dataset(eval_key.empty() ? target_dir : ctx.resolve(eval_key), GtUse::kDense);
  prepare(ctx, out);

  DapeConfig cfg;
  cfg.optim = optim_config(ctx.config, "finetune");
  cfg.loss = loss_config(ctx.config);
  cfg.edge_weight = ctx.config.get_real("dape.edge_weight");

  // Pseudo-labels come from the pre-trained model, once, for every threshold.
  const std::string hash = io::file_sha256(ckpt);
  const auto edges = predict_target_edges(*model, edge, target);
  std::vector<std::string> names;
  for (const auto& s : target) names.push_back(s.name);
  log(ctx) << "predicted target edge maps for " << target.size() << " samples\n";

  auto plain = clone_model(*model);
  const DapeResult plain_run = finetune_plain(*plain, target, cfg);
  io::write_text(out / "finetune_plain_log.csv", training_csv(plain_run.log));
  io::save_checkpoint(out / "finetune_plain.ckpt", plain->parameters());
  const auto plain_agg = aggregate(evaluate_model(*plain, held_out));

  std::ostringstream paired;
  paired << "threshold,region,pixels,label_coverage,epe_plain,epe_dape,err_3px_plain,err_3px_dape,d1_plain,d1_dape\n";
  for (double t : thresholds) {
    const fs::path cache_dir = out / "pseudo_labels" / ("t" + tag(t));
    save_pseudo_label_cache(cache_dir, select_pseudo_labels(edges, t, hash), names);
    const PseudoLabelCache cache = load_pseudo_label_cache(cache_dir, names);
    std::size_t covered = 0, total = 0;
    for (const auto& l : cache.labels) {
      covered += l.valid.count();
      total += l.valid.size();
    }

    auto tuned = clone_model(*model);
    const DapeResult run = dape_finetune(*tuned, target, &cache, cfg);
    io::write_text(out / ("dape_t" + tag(t) + "_log.csv"), training_csv(run.log));
    io::save_checkpoint(out / ("dape_t" + tag(t) + ".ckpt"), tuned->parameters());
    const auto agg = aggregate(evaluate_model(*tuned, held_out));
    for (const auto& a : agg) {
      const auto& p = find_aggregate(plain_agg, a.domain, a.region);
      paired << tag(t) << ',' << a.region << ',' << a.pixels << ','
             << fmt(static_cast<double>(covered) / static_cast<double>(total)) << ',' << fmt(p.epe) << ','
             << fmt(a.epe) << ',' << fmt(p.err_rates.at(3.0)) << ',' << fmt(a.err_rates.at(3.0)) << ','
             << fmt(p.d1) << ',' << fmt(a.d1) << '\n';
    }
    const auto& e = find_aggregate(agg, agg.front().domain, "all");
    log(ctx) << "t=" << tag(t) << ": epe " << fmt(e.epe) << " (plain "
             << fmt(find_aggregate(plain_agg, e.domain, "all").epe) << ")\n";
  }
  io::write_text(out / "paired.csv", paired.str());
  return kExitOk;
}

int cmd_gradcheck(const Context& ctx, int instances) {
  GradcheckConfig cfg;
  cfg.instances = instances;
  const auto reports = run_gradcheck_suite(cfg);
  std::ostringstream csv;
  csv << "op,instances,failed,coords_checked,coords_skipped,worst_rel_error,passed\n";
  bool ok = true;
  for (const auto& r : reports) {
    csv << r.op << ',' << r.instances << ',' << r.failed << ',' << r.coords_checked << ',' << r.coords_skipped << ','
        << fmt(r.worst_rel_error) << ',' << (r.passed() ? "yes" : "no") << '\n';
    log(ctx) << (r.passed() ? "PASS " : "FAIL ") << std::left << std::setw(24) << r.op << " worst rel error "
             << fmt(r.worst_rel_error) << " (" << r.coords_checked << " coords, " << r.coords_skipped
             << " skipped at kinks)\n";
    ok = ok && r.passed();
  }
  if (!ctx.config.get_string("paths.output").empty()) {
    const fs::path out = ctx.output_dir("gradcheck");
    prepare(ctx, out);
    io::write_text(out / "gradcheck.csv", csv.str());
  }
  return ok ? kExitOk : kExitAcceptance;
}

}  // namespace srstereo::cli
