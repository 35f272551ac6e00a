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

// Run configuration: a flat, typed key-value file with [section] headers
// (INI syntax). Every key has a type and a default; unknown keys and
// ill-typed values are rejected. Overrides use "section.key=value".

#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "srstereo/dataset.hpp"
#include "srstereo/model.hpp"
#include "srstereo/train.hpp"

namespace srstereo {

enum class ValueType { kInt, kReal, kBool, kString };

class RunConfig {
 public:
  struct Entry {
    std::string key;  // section.name
    ValueType type;
    std::string value;
    std::string help;
  };

  /// Every known key at its default.
  static RunConfig defaults();

  void merge_file(const std::filesystem::path& path);
  /// "section.key=value".
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool contains(const std::string& key) const;
  /// True once a file or override has assigned the key.
  bool is_explicit(const std::string& key) const { return explicit_.count(key) > 0; }
  long long get_int(const std::string& key) const;
  std::uint64_t get_seed(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;

  /// INI text of every key, in schema order.
  std::string to_ini() const;
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  const Entry& find(const std::string& key) const;
  Entry& find(const std::string& key);
  std::vector<Entry> entries_;
  std::set<std::string> explicit_;
};

ModelConfig model_config(const RunConfig& c);
LossConfig loss_config(const RunConfig& c);
OptimConfig optim_config(const RunConfig& c, const std::string& section);
SceneSpec scene_spec(const RunConfig& c);
EdgeEstimatorConfig edge_config(const RunConfig& c);

/// "label:d_min:d_max[:drop_prob],..." from scene.domains; empty means a
/// single domain named "main" over [scene.d_min, scene.d_max].
std::vector<DomainRequest> domain_requests(const RunConfig& c);

/// Comma-separated reals, e.g. dape.thresholds.
std::vector<double> parse_real_list(const std::string& text, const std::string& what);

}  // namespace srstereo
