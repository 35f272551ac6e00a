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

#include "srstereo/config.hpp"
#include "srstereo/io.hpp"
#include "test_util.hpp"

using namespace srstereo;
using namespace srstereo::testing;
namespace fs = std::filesystem;

TEST_CASE("defaults carry the final configuration") {
  const RunConfig c = RunConfig::defaults();
  const ModelConfig m = model_config(c);
  CHECK(m.m == 2.0);
  CHECK(m.num_sru == 15);
  CHECK(m.num_gru == 0);
  const LossConfig l = loss_config(c);
  CHECK(l.h == 0.5);
  CHECK(l.gamma == 0.9);
  CHECK(l.iterations == 15);
  CHECK(parse_real_list(c.get_string("dape.thresholds"), "t") == std::vector<double>{0.25});
  const OptimConfig o = optim_config(c, "optim");
  CHECK(o.adamw.beta1 == 0.9);
  CHECK(o.adamw.beta2 == 0.999);
  CHECK(o.adamw.weight_decay == 1e-5);
  CHECK(!c.is_explicit("model.m"));
}

TEST_CASE("file, override and flag precedence") {
  const fs::path dir = scratch("config");
  io::write_text(dir / "a.ini", "[model]\nm = 1.5\nnum_gru = 3\n\n[optim]\nsteps = 10\n");
  RunConfig c = RunConfig::defaults();
  c.merge_file(dir / "a.ini");
  CHECK(c.get_real("model.m") == 1.5);
  CHECK(c.is_explicit("model.m"));
  c.apply_override("model.m=3");
  CHECK(c.get_real("model.m") == 3.0);
  c.set("optim.steps", "12");
  CHECK(c.get_int("optim.steps") == 12);
  CHECK(c.get_int("model.num_gru") == 3);

  // The archived text reloads to the same values.
  io::write_text(dir / "b.ini", c.to_ini());
  RunConfig r = RunConfig::defaults();
  r.merge_file(dir / "b.ini");
  CHECK(r.to_ini() == c.to_ini());
}

TEST_CASE("bad keys and values are rejected") {
  const fs::path dir = scratch("config_bad");
  RunConfig c = RunConfig::defaults();
  CHECK_THROWS_AS(c.set("model.nope", "1"), ContractError);
  CHECK_THROWS_AS(c.set("model.num_sru", "1.5"), ContractError);
  CHECK_THROWS_AS(c.set("model.m", "two"), ContractError);
  CHECK_THROWS_AS(c.set("loss.supervise_clips", "maybe"), ContractError);
  CHECK_THROWS_AS(c.apply_override("model.m"), ContractError);
  CHECK_THROWS_AS(c.get_int("model.m"), ContractError);
  io::write_text(dir / "u.ini", "[model]\nwidth = 3\n");
  CHECK_THROWS_AS(c.merge_file(dir / "u.ini"), ContractError);
  io::write_text(dir / "g.ini", "[model\nm = 1\n");
  CHECK_THROWS_AS(c.merge_file(dir / "g.ini"), ContractError);
  c.set("model.upsample", "nearest");
  CHECK_THROWS_AS(model_config(c), ContractError);
}

TEST_CASE("domain requests") {
  RunConfig c = RunConfig::defaults();
  auto one = domain_requests(c);
  REQUIRE(one.size() == 1);
  CHECK(one[0].label == "main");
  c.set("scene.domains", "near:0:24, far:10:40:0.5");
  auto two = domain_requests(c);
  REQUIRE(two.size() == 2);
  CHECK(two[1].label == "far");
  CHECK(two[1].spec.d_min == 10.0);
  CHECK(two[1].drop_prob == 0.5);
  CHECK(two[0].spec.seed != two[1].spec.seed);
  c.set("scene.domains", "bad:0");
  CHECK_THROWS_AS(domain_requests(c), ContractError);
  c.set("scene.domains", "wide:0:60");
  CHECK_THROWS_AS(domain_requests(c), ContractError);
  CHECK_THROWS_AS(parse_real_list("0.25,x", "t"), ContractError);
  CHECK_THROWS_AS(parse_real_list("", "t"), ContractError);
}
