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

// srstereo <command> [--config FILE] [--set section.key=value]... [flags]
//
// Commands: gen-scenes, train, eval, dape, gradcheck. Exit codes: 0 ok,
// 1 usage, 2 contract violation, 3 acceptance failure.

#include <CLI11.hpp>
#include <iostream>
#include <map>

#include "commands.hpp"
#include "srstereo/io.hpp"

using namespace srstereo;

namespace {

// A flag that is shorthand for one config key.
struct KeyFlags {
  std::map<std::string, std::string> values;  // key -> raw value
  std::vector<std::pair<std::string, std::string>> order;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    order.emplace_back(flag, key);
    app->add_option(flag, values[key], help + " [" + key + "]");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stepwise-regression stereo matching on synthetic scenes"};
  app.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> overrides;
  bool force = false;
  int gradcheck_instances = 20;
  std::map<std::string, KeyFlags> flags;

  auto common = [&](CLI::App* sub, const std::string& name) {
    sub->add_option("--config", config_file, "INI config file")->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "override, section.key=value (repeatable)");
    sub->add_flag("--force", force, "replace a non-empty output directory");
    flags[name].add(sub, "--out", "paths.output", "output directory");
  };

  auto* gen = app.add_subcommand("gen-scenes", "generate a synthetic stereo dataset");
  common(gen, "gen-scenes");
  flags["gen-scenes"].add(gen, "--samples", "scene.samples", "samples per domain");
  flags["gen-scenes"].add(gen, "--seed", "scene.seed", "base seed");
  flags["gen-scenes"].add(gen, "--domains", "scene.domains", "label:d_min:d_max[:drop],...");
  flags["gen-scenes"].add(gen, "--drop-prob", "scene.drop_prob", "gt sparsification");

  auto* train = app.add_subcommand("train", "pre-train the stereo model and the edge estimator");
  common(train, "train");
  flags["train"].add(train, "--dataset", "paths.dataset", "dataset directory");
  flags["train"].add(train, "--steps", "optim.steps", "optimisation steps");
  flags["train"].add(train, "--lr", "optim.learning_rate", "peak learning rate");
  flags["train"].add(train, "--num-gru", "model.num_gru", "residual units");
  flags["train"].add(train, "--num-sru", "model.num_sru", "stepwise units");
  flags["train"].add(train, "--clip-m", "model.m", "clip ceiling");
  flags["train"].add(train, "--balance-h", "loss.h", "clip-balance exponent");
  flags["train"].add(train, "--supervise-clips", "loss.supervise_clips", "true | false");
  flags["train"].add(train, "--edge-steps", "edge.steps", "edge estimator steps (0 skips)");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  common(eval, "eval");
  flags["eval"].add(eval, "--checkpoint", "paths.checkpoint", "stereo checkpoint");
  flags["eval"].add(eval, "--edge-checkpoint", "paths.edge_checkpoint", "edge checkpoint (adds edge F1)");
  flags["eval"].add(eval, "--dataset", "paths.dataset", "dataset directory");
  flags["eval"].add(eval, "--domain", "eval.domain", "restrict to one domain");

  auto* dape = app.add_subcommand("dape", "pseudo-label generation and edge-aware fine-tuning");
  common(dape, "dape");
  flags["dape"].add(dape, "--checkpoint", "paths.checkpoint", "pre-trained stereo checkpoint");
  flags["dape"].add(dape, "--edge-checkpoint", "paths.edge_checkpoint", "pre-trained edge checkpoint");
  flags["dape"].add(dape, "--target", "paths.target", "target dataset with sparse gt");
  flags["dape"].add(dape, "--target-eval", "paths.target_eval", "held-out dense target dataset");
  flags["dape"].add(dape, "--thresholds", "dape.thresholds", "comma-separated t values");
  flags["dape"].add(dape, "--steps", "finetune.steps", "fine-tuning steps");

  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every backward pass");
  common(grad, "gradcheck");
  grad->add_option("--instances", gradcheck_instances, "random instances per operation")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    cli::Context ctx{RunConfig::defaults(), cli::output_root(), force, &std::cout};
    if (!config_file.empty()) ctx.config.merge_file(config_file);
    for (const auto& o : overrides) ctx.config.apply_override(o);
    for (const auto& [flag, key] : flags[name].order)
      if (sub->count(flag) > 0) ctx.config.set(key, flags[name].values[key]);
    if ((name == "eval" || name == "dape") && !ctx.config.get_string("paths.checkpoint").empty())
      cli::inherit_model_config(ctx.config, ctx.resolve(ctx.config.get_string("paths.checkpoint")));

    if (name == "gen-scenes") return cli::cmd_gen_scenes(ctx);
    if (name == "train") return cli::cmd_train(ctx);
    if (name == "eval") return cli::cmd_eval(ctx);
    if (name == "dape") return cli::cmd_dape(ctx);
    return cli::cmd_gradcheck(ctx, gradcheck_instances);
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitContract;
  } catch (const io::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitContract;
  }
}
