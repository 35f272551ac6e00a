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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "srstereo/config.hpp"

namespace srstereo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitContract = 2;
inline constexpr int kExitAcceptance = 3;

/// Relative paths in the config resolve against this root.
inline constexpr const char* kOutputRootEnv = "SRSTEREO_OUTPUT_ROOT";

struct Context {
  RunConfig config;
  std::filesystem::path root;
  bool force = false;
  std::ostream* log = nullptr;  // progress messages; null discards them

  std::filesystem::path resolve(const std::string& path) const;
  /// paths.output resolved, or root/<fallback> when unset.
  std::filesystem::path output_dir(const std::string& fallback) const;
};

/// Root from the environment (current directory when unset).
std::filesystem::path output_root();

/// Loads model.* keys archived next to a checkpoint (config.ini in the same
/// directory), unless the caller set them explicitly.
void inherit_model_config(RunConfig& config, const std::filesystem::path& checkpoint);

int cmd_gen_scenes(const Context& ctx);
int cmd_train(const Context& ctx);
int cmd_eval(const Context& ctx);
int cmd_dape(const Context& ctx);
int cmd_gradcheck(const Context& ctx, int instances);

}  // namespace srstereo::cli
