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

#include <bit>
#include <cstring>
#include <fstream>

#include "srstereo/io.hpp"
#include "test_util.hpp"

using namespace srstereo;
using namespace srstereo::testing;
namespace fs = std::filesystem;

namespace {

std::string bytes_of(const fs::path& p) { return io::read_text(p); }

}  // namespace

TEST_CASE("PFM byte layout: little-endian floats, bottom row first") {
  const fs::path dir = scratch("io_pfm");
  Tensor t(1, 2, 3);
  for (int i = 0; i < 6; ++i) t[i] = 0.5 * i - 1.0;
  io::write_pfm(dir / "t.pfm", t);
  std::string expect = "Pf\n3 2\n-1.0\n";
  for (int y : {1, 0})
    for (int x = 0; x < 3; ++x) {
      const float f = static_cast<float>(t.at(0, y, x));
      char b[4];
      std::memcpy(b, &f, 4);
      expect.append(b, 4);
    }
  CHECK(bytes_of(dir / "t.pfm") == expect);
  CHECK(io::read_pfm(dir / "t.pfm") == t);
}

TEST_CASE("format round-trips are bit-exact") {
  const fs::path dir = scratch("io_roundtrip");
  Rng rng(81);
  for (int i = 0; i < 10; ++i) {
    Tensor f = normal(1, 7 + i, 5 + 2 * i, 1e3, rng);
    for (auto& v : f.span()) v = static_cast<float>(v);
    io::write_pfm(dir / "f.pfm", f);
    CHECK(io::read_pfm(dir / "f.pfm") == f);

    Image img(3, 4 + i, 6);
    std::uniform_int_distribution<int> byte(0, 255);
    for (auto& v : img.span()) v = byte(rng) / 255.0;
    io::write_ppm(dir / "i.ppm", img);
    CHECK(io::read_ppm(dir / "i.ppm") == img);
    io::write_ppm(dir / "j.ppm", io::read_ppm(dir / "i.ppm"));
    CHECK(bytes_of(dir / "i.ppm") == bytes_of(dir / "j.ppm"));

    Mask m(3 + i, 9);
    for (std::size_t k = 0; k < m.size(); ++k) m.set(k, byte(rng) > 100);
    io::write_pgm(dir / "m.pgm", m);
    CHECK(io::read_pgm(dir / "m.pgm") == m);
  }
}

TEST_CASE("PPM quantises and clamps") {
  const fs::path dir = scratch("io_ppm");
  Image img(3, 1, 1);
  img[0] = -0.2, img[1] = 0.5, img[2] = 1.7;
  io::write_ppm(dir / "q.ppm", img);
  const std::string b = bytes_of(dir / "q.ppm");
  CHECK(b == std::string("P6\n1 1\n255\n") + std::string{'\x00', '\x80', '\xff'});
}

TEST_CASE("malformed files are rejected") {
  const fs::path dir = scratch("io_bad");
  io::write_text(dir / "a.pfm", "PF\n1 1\n-1.0\n0000");
  CHECK_THROWS_AS(io::read_pfm(dir / "a.pfm"), io::FormatError);
  io::write_text(dir / "b.pfm", "Pf\n2 2\n-1.0\n0000");
  CHECK_THROWS_AS(io::read_pfm(dir / "b.pfm"), io::FormatError);
  io::write_text(dir / "c.pfm", "Pf\n1 1\n1.0\n0000");
  CHECK_THROWS_AS(io::read_pfm(dir / "c.pfm"), io::FormatError);
  io::write_text(dir / "d.ppm", "P3\n1 1\n255\n0 0 0");
  CHECK_THROWS_AS(io::read_ppm(dir / "d.ppm"), io::FormatError);
  io::write_text(dir / "e.pgm", "P5\n2 2\n65535\n");
  CHECK_THROWS_AS(io::read_pgm(dir / "e.pgm"), io::FormatError);
  CHECK_THROWS_AS(io::read_pfm(dir / "missing.pfm"), io::FormatError);
  CHECK_THROWS_AS(io::write_pfm(dir / "x.pfm", Tensor(3, 2, 2)), ContractError);
}

TEST_CASE("checkpoints round-trip and check their layout") {
  const fs::path dir = scratch("io_ckpt");
  Rng rng(82);
  ParameterStore a;
  a.add("conv.weight", normal(4, 3, 9, 1.0, rng));
  a.add("conv.bias", normal(4, 1, 1, 1.0, rng));
  a.entries()[0].var.mutable_value()[0] = -0.0;
  a.entries()[0].var.mutable_value()[1] = 5e-324;
  io::save_checkpoint(dir / "a.ckpt", a);

  ParameterStore b;
  b.add("conv.weight", Tensor(4, 3, 9));
  b.add("conv.bias", Tensor(4, 1, 1));
  io::load_checkpoint(dir / "a.ckpt", b);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < a.entries()[i].var.value().size(); ++k)
      CHECK(std::bit_cast<std::uint64_t>(a.entries()[i].var.value()[k]) ==
            std::bit_cast<std::uint64_t>(b.entries()[i].var.value()[k]));
  io::save_checkpoint(dir / "b.ckpt", b);
  CHECK(io::file_sha256(dir / "a.ckpt") == io::file_sha256(dir / "b.ckpt"));

  ParameterStore wrong_shape;
  wrong_shape.add("conv.weight", Tensor(4, 3, 1));
  wrong_shape.add("conv.bias", Tensor(4, 1, 1));
  CHECK_THROWS_AS(io::load_checkpoint(dir / "a.ckpt", wrong_shape), io::FormatError);
  ParameterStore wrong_count;
  wrong_count.add("conv.weight", Tensor(4, 3, 9));
  CHECK_THROWS_AS(io::load_checkpoint(dir / "a.ckpt", wrong_count), io::FormatError);
  std::string text = bytes_of(dir / "a.ckpt");
  io::write_text(dir / "t.ckpt", text.substr(0, text.size() - 9));
  CHECK_THROWS_AS(io::load_checkpoint(dir / "t.ckpt", b), io::FormatError);
}

TEST_CASE("sha256 of a known string") {
  const fs::path dir = scratch("io_sha");
  io::write_text(dir / "abc", "abc");
  CHECK(io::file_sha256(dir / "abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("colour ramp endpoints") {
  Tensor f(1, 1, 3);
  f[0] = -5.0, f[1] = 5.0, f[2] = 50.0;
  const Image c = io::color_ramp(f, 0.0, 10.0);
  CHECK(c.at(2, 0, 0) == 0.5);  // dark blue
  // The middle falls halfway between the cyan and yellow stops.
  CHECK(c.at(0, 0, 1) == 0.5);
  CHECK(c.at(1, 0, 1) == 1.0);
  CHECK(c.at(2, 0, 1) == 0.5);
  CHECK(c.at(0, 0, 2) == 0.5);  // dark red
  CHECK_THROWS_AS(io::color_ramp(f, 1.0, 1.0), ContractError);
}
