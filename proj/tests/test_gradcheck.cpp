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


#include <doctest.h>

#include "srstereo/gradcheck.hpp"
#include "test_util.hpp"

using namespace srstereo;
using namespace srstereo::testing;

TEST_CASE("checker accepts a correct gradient") {
  Rng rng(91);
  ag::Var x = ag::leaf(normal(2, 3, 4, 1.0, rng));
  const Tensor w = normal(2, 3, 4, 1.0, rng);
  GradcheckProblem p{{x}, [&] { return ag::weighted_sum(ag::tanh(x), w); }};
  const InstanceCheck c = check_gradients(p, GradcheckConfig{}, rng);
  CHECK(c.checked == 8);
  CHECK(c.rel_error < 1e-6);
}

TEST_CASE("checker catches a wrong gradient") {
  Rng rng(92);
  ag::Var x = ag::leaf(normal(1, 4, 4, 1.0, rng));
  const Tensor w = normal(1, 4, 4, 1.0, rng);
  // Detaching one factor halves the analytic gradient of x^2.
  GradcheckProblem p{{x}, [&] { return ag::weighted_sum(ag::mul(x, ag::detach(x)), w); }};
  const InstanceCheck c = check_gradients(p, GradcheckConfig{}, rng);
  CHECK(c.checked > 0);
  CHECK(c.rel_error > 0.1);
}

TEST_CASE("coordinates at a kink are skipped") {
  Rng rng(93);
  ag::Var x = ag::leaf(Tensor(1, 2, 2));
  GradcheckProblem p{{x}, [&] { return ag::weighted_sum(ag::relu(x), Tensor(1, 2, 2, 1.0)); }};
  const InstanceCheck c = check_gradients(p, GradcheckConfig{}, rng);
  CHECK(c.checked == 0);
  CHECK(c.skipped == 4);
}

TEST_CASE("every registered operation passes") {
  GradcheckConfig cfg;
  cfg.instances = 3;
  const auto reports = run_gradcheck_suite(cfg);
  CHECK(reports.size() == gradcheck_ops().size());
  for (const auto& r : reports) {
    INFO(r.op);
    CHECK(r.passed());
    CHECK(r.worst_rel_error < cfg.tolerance);
  }
  CHECK_THROWS_AS(run_gradcheck("no_such_op", cfg), ContractError);
}
