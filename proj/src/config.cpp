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

#include "srstereo/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace srstereo {

namespace {

using V = ValueType;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

bool parse_int(const std::string& s, long long& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtoll(s.c_str(), &end, 10);
  return errno == 0 && *end == '\0';
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && *end == '\0' && std::isfinite(out);
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return out = true, true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return out = false, true;
  return false;
}

const char* type_name(V t) {
  switch (t) {
    case V::kInt: return "integer";
    case V::kReal: return "real";
    case V::kBool: return "boolean";
    case V::kString: return "string";
  }
  return "?";
}

void check_value(const RunConfig::Entry& e, const std::string& value) {
  long long i;
  double r;
  bool b;
  const bool ok = e.type == V::kInt    ? parse_int(value, i)
                  : e.type == V::kReal ? parse_real(value, r)
                  : e.type == V::kBool ? parse_bool(value, b)
                                       : true;
  require(ok, "config: " + e.key + " expects a " + type_name(e.type) + ", got '" + value + "'");
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.entries_ = {
      {"scene.seed", V::kInt, "11", "base seed of the scene generator"},
      {"scene.samples", V::kInt, "200", "samples per domain"},
      {"scene.height", V::kInt, "64", ""},
      {"scene.width", V::kInt, "96", ""},
      {"scene.num_layers", V::kInt, "3", "background plus foreground shapes"},
      {"scene.d_min", V::kReal, "0", ""},
      {"scene.d_max", V::kReal, "24", ""},
      {"scene.noise_amplitude", V::kReal, "0.5", "texture noise amplitude"},
      {"scene.sine_frequency", V::kReal, "0.12", "texture sine frequency (cycles/px)"},
      {"scene.noise_sigma", V::kReal, "0.02", "sensor noise"},
      {"scene.domains", V::kString, "", "label:d_min:d_max[:drop_prob],... (empty: one domain 'main')"},
      {"scene.drop_prob", V::kReal, "0", "gt sparsification for the default domain"},
      {"model.feature_channels", V::kInt, "16", ""},
      {"model.context_channels", V::kInt, "16", ""},
      {"model.hidden_channels", V::kInt, "16", ""},
      {"model.temperature", V::kReal, "0.1", "soft-argmax temperature of the initial disparity"},
      {"model.upsample", V::kString, "bilinear", "bilinear | convex"},
      {"model.num_gru", V::kInt, "0", "residual units (run first)"},
      {"model.num_sru", V::kInt, "15", "stepwise units"},
      {"model.m", V::kReal, "2", "clip ceiling"},
      {"model.init_seed", V::kInt, "1", ""},
      {"loss.gamma", V::kReal, "0.9", ""},
      {"loss.h", V::kReal, "0.5", "clip-balance exponent"},
      {"loss.supervise_clips", V::kBool, "true", "add the per-step clip loss"},
      {"optim.learning_rate", V::kReal, "0.002", "peak of the one-cycle schedule"},
      {"optim.steps", V::kInt, "2000", ""},
      {"optim.batch", V::kInt, "2", ""},
      {"optim.seed", V::kInt, "1", "sample order"},
      {"optim.weight_decay", V::kReal, "1e-05", ""},
      {"optim.beta1", V::kReal, "0.9", ""},
      {"optim.beta2", V::kReal, "0.999", ""},
      {"optim.clip_norm", V::kReal, "1", "global gradient-norm clip (0 disables)"},
      {"edge.zero_disparity_input", V::kBool, "false", "RGB-only estimator ablation"},
      {"edge.init_seed", V::kInt, "7", ""},
      {"edge.learning_rate", V::kReal, "0.002", ""},
      {"edge.steps", V::kInt, "1500", ""},
      {"edge.batch", V::kInt, "1", ""},
      {"edge.seed", V::kInt, "3", ""},
      {"finetune.learning_rate", V::kReal, "0.0005", ""},
      {"finetune.steps", V::kInt, "300", ""},
      {"finetune.batch", V::kInt, "1", ""},
      {"finetune.seed", V::kInt, "5", ""},
      {"dape.thresholds", V::kString, "0.25", "comma-separated pseudo-label thresholds"},
      {"dape.edge_weight", V::kReal, "1", ""},
      {"eval.dump_images", V::kBool, "true", "write colour-ramp PPMs"},
      {"eval.max_dumps", V::kInt, "4", "samples per domain with image dumps"},
      {"eval.domain", V::kString, "", "restrict to one domain label"},
      {"paths.dataset", V::kString, "", "training / evaluation dataset"},
      {"paths.target", V::kString, "", "target-domain dataset with sparse gt (dape)"},
      {"paths.target_eval", V::kString, "", "held-out dense target dataset (dape)"},
      {"paths.checkpoint", V::kString, "", "stereo checkpoint"},
      {"paths.edge_checkpoint", V::kString, "", "edge estimator checkpoint"},
      {"paths.output", V::kString, "", "output directory (relative to the output root)"},
  };
  return c;
}

const RunConfig::Entry& RunConfig::find(const std::string& key) const {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
  require(it != entries_.end(), "config: unknown key '" + key + "'");
  return *it;
}

RunConfig::Entry& RunConfig::find(const std::string& key) {
  return const_cast<Entry&>(static_cast<const RunConfig&>(*this).find(key));
}

bool RunConfig::contains(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
}

void RunConfig::set(const std::string& key, const std::string& value) {
  Entry& e = find(key);
  const std::string v = trim(value);
  check_value(e, v);
  e.value = v;
  explicit_.insert(key);
}

void RunConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, "config: override '" + assignment + "' is not section.key=value");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ContractError("config: " + std::string(e.what()));
  }
  for (const auto& [section, body] : tree) {
    require(!body.empty() || body.data().empty(), "config: key '" + section + "' outside any [section]");
    for (const auto& [key, value] : body) set(section + "." + key, value.data());
  }
}

long long RunConfig::get_int(const std::string& key) const {
  const Entry& e = find(key);
  require(e.type == V::kInt, "config: " + key + " is not an integer");
  long long v = 0;
  parse_int(e.value, v);
  return v;
}

std::uint64_t RunConfig::get_seed(const std::string& key) const {
  const long long v = get_int(key);
  require(v >= 0, "config: " + key + " must be non-negative");
  return static_cast<std::uint64_t>(v);
}

double RunConfig::get_real(const std::string& key) const {
  const Entry& e = find(key);
  require(e.type == V::kReal, "config: " + key + " is not a real");
  double v = 0;
  parse_real(e.value, v);
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  const Entry& e = find(key);
  require(e.type == V::kBool, "config: " + key + " is not a boolean");
  bool v = false;
  parse_bool(e.value, v);
  return v;
}

std::string RunConfig::get_string(const std::string& key) const {
  const Entry& e = find(key);
  require(e.type == V::kString, "config: " + key + " is not a string");
  return e.value;
}

std::string RunConfig::to_ini() const {
  std::ostringstream out;
  std::string section;
  for (const auto& e : entries_) {
    const auto dot = e.key.find('.');
    const std::string s = e.key.substr(0, dot);
    if (s != section) {
      if (!section.empty()) out << '\n';
      out << '[' << s << "]\n";
      section = s;
    }
    out << e.key.substr(dot + 1) << " = " << e.value << '\n';
  }
  return out.str();
}

ModelConfig model_config(const RunConfig& c) {
  ModelConfig m;
  m.feature_channels = static_cast<int>(c.get_int("model.feature_channels"));
  m.context_channels = static_cast<int>(c.get_int("model.context_channels"));
  m.hidden_channels = static_cast<int>(c.get_int("model.hidden_channels"));
  m.temperature = c.get_real("model.temperature");
  const std::string up = c.get_string("model.upsample");
  require(up == "bilinear" || up == "convex", "config: model.upsample must be bilinear or convex, got '" + up + "'");
  m.upsample = up == "convex" ? UpsampleMode::kConvex : UpsampleMode::kBilinear;
  m.num_gru = static_cast<int>(c.get_int("model.num_gru"));
  m.num_sru = static_cast<int>(c.get_int("model.num_sru"));
  m.m = c.get_real("model.m");
  m.init_seed = c.get_seed("model.init_seed");
  require(m.feature_channels > 0 && m.context_channels > 0 && m.hidden_channels > 0,
          "config: channel counts must be positive");
  require(m.temperature > 0.0, "config: model.temperature must be positive");
  require(m.num_gru >= 0 && m.num_sru >= 0, "config: unit counts must be non-negative");
  return m;
}

LossConfig loss_config(const RunConfig& c) {
  LossConfig l;
  l.gamma = c.get_real("loss.gamma");
  l.h = c.get_real("loss.h");
  l.supervise_clips = c.get_bool("loss.supervise_clips");
  l.iterations = static_cast<int>(c.get_int("model.num_gru") + c.get_int("model.num_sru"));
  return l;
}

OptimConfig optim_config(const RunConfig& c, const std::string& section) {
  OptimConfig o;
  o.learning_rate = c.get_real(section + ".learning_rate");
  o.steps = static_cast<int>(c.get_int(section + ".steps"));
  o.batch = static_cast<int>(c.get_int(section + ".batch"));
  o.seed = c.get_seed(section + ".seed");
  o.adamw.weight_decay = c.get_real("optim.weight_decay");
  o.adamw.beta1 = c.get_real("optim.beta1");
  o.adamw.beta2 = c.get_real("optim.beta2");
  o.adamw.clip_norm = c.get_real("optim.clip_norm");
  return o;
}

SceneSpec scene_spec(const RunConfig& c) {
  SceneSpec s;
  s.seed = c.get_seed("scene.seed");
  s.height = static_cast<int>(c.get_int("scene.height"));
  s.width = static_cast<int>(c.get_int("scene.width"));
  s.num_layers = static_cast<int>(c.get_int("scene.num_layers"));
  s.d_min = c.get_real("scene.d_min");
  s.d_max = c.get_real("scene.d_max");
  s.texture.noise_amplitude = c.get_real("scene.noise_amplitude");
  s.texture.sine_frequency = c.get_real("scene.sine_frequency");
  s.noise_sigma = c.get_real("scene.noise_sigma");
  s.validate();
  return s;
}

EdgeEstimatorConfig edge_config(const RunConfig& c) {
  return {c.get_bool("edge.zero_disparity_input"), c.get_seed("edge.init_seed")};
}

std::vector<double> parse_real_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    double v;
    require(parse_real(trim(item), v), "config: " + what + " has a non-numeric entry '" + item + "'");
    out.push_back(v);
  }
  require(!out.empty(), "config: " + what + " is empty");
  return out;
}

std::vector<DomainRequest> domain_requests(const RunConfig& c) {
  const SceneSpec base = scene_spec(c);
  const int samples = static_cast<int>(c.get_int("scene.samples"));
  const std::string text = c.get_string("scene.domains");
  if (text.empty()) return {{"main", base, samples, c.get_real("scene.drop_prob")}};

  std::vector<DomainRequest> out;
  std::istringstream in(text);
  std::string item;
  std::uint64_t index = 0;
  while (std::getline(in, item, ',')) {
    std::vector<std::string> f;
    std::istringstream parts(trim(item));
    std::string p;
    while (std::getline(parts, p, ':')) f.push_back(trim(p));
    require(f.size() == 3 || f.size() == 4, "config: scene.domains entry '" + item + "' is not label:d_min:d_max[:drop]");
    DomainRequest d;
    d.label = f[0];
    d.spec = base;
    require(parse_real(f[1], d.spec.d_min) && parse_real(f[2], d.spec.d_max),
            "config: scene.domains entry '" + item + "' has a non-numeric range");
    d.drop_prob = 0.0;
    if (f.size() == 4) require(parse_real(f[3], d.drop_prob), "config: bad drop_prob in '" + item + "'");
    d.spec.seed = mix_seed(base.seed, index++);
    d.spec.validate();
    d.samples = samples;
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace srstereo
