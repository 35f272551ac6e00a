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

// Central finite-difference checks of the hand-written backward passes.
//
// Each instance projects an operation's outputs onto a random scalar and
// compares the analytic gradient of sampled leaf coordinates with
// (f(x + e) - f(x - e)) / 2e. Near a smooth point the second difference
// f(x + s) - 2 f(x) + f(x - s) shrinks like s^2; a coordinate where halving
// s twice breaks that scaling by more than kink_tolerance (relative to the
// slope) has a kink within the step (ReLU, clamp, |x|, sampling grid) and
// is skipped. The error of an instance is
//
//     max |analytic - numeric| / max(max |analytic|, max |numeric|, 1e-8)
//
// over its checked coordinates.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "srstereo/nn.hpp"

namespace srstereo {

struct GradcheckConfig {
  double step = 1e-3;
  double tolerance = 1e-4;
  double kink_tolerance = 1e-5;
  int instances = 20;
  int coords_per_leaf = 8;
  std::uint64_t seed = 2026;
};

struct GradcheckProblem {
  std::vector<ag::Var> leaves;
  std::function<ag::Var()> loss;  // rebuilt from the current leaf values
};

struct InstanceCheck {
  double rel_error = 0.0;
  int checked = 0, skipped = 0;
};

InstanceCheck check_gradients(GradcheckProblem& problem, const GradcheckConfig& cfg, Rng& rng);

struct GradcheckReport {
  std::string op;
  int instances = 0;
  int failed = 0;
  int coords_checked = 0;
  int coords_skipped = 0;
  double worst_rel_error = 0.0;

  bool passed() const { return instances > 0 && failed == 0 && coords_checked > 0; }
};

/// Names accepted by run_gradcheck, in suite order.
const std::vector<std::string>& gradcheck_ops();

GradcheckReport run_gradcheck(const std::string& op, const GradcheckConfig& cfg);
std::vector<GradcheckReport> run_gradcheck_suite(const GradcheckConfig& cfg);

}  // namespace srstereo
