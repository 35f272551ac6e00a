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

// File formats: binary PPM (P6, 8-bit RGB), PGM (P5, 8-bit masks), PFM
// (Pf, little-endian float32 with a negative scale, rows stored bottom-up),
// and the parameter checkpoint.
//
// Checkpoint layout:
//
//   SRSTEREO-CHECKPOINT 1
//   tensors <n>
//   <name> <channels> <height> <width> <byte offset>     (n lines)
//   end
//   <payload: float64 little-endian, tensors back to back>
//
// Offsets are relative to the first payload byte.

#pragma once

#include <filesystem>
#include <string>

#include "srstereo/nn.hpp"
#include "srstereo/tensor.hpp"

namespace srstereo::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_ppm(const std::filesystem::path& path, const Image& rgb);
Image read_ppm(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const Mask& mask);
Mask read_pgm(const std::filesystem::path& path);

void write_pfm(const std::filesystem::path& path, const Tensor& field);
Tensor read_pfm(const std::filesystem::path& path);

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store);
/// Loads values into an already-built store; names and shapes must match.
void load_checkpoint(const std::filesystem::path& path, ParameterStore& store);

/// Fixed blue-cyan-yellow-red ramp; values are clamped to [lo, hi].
Image color_ramp(const Tensor& field, double lo, double hi);

/// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace srstereo::io
