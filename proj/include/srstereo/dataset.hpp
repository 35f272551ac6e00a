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

// On-disk datasets of generated scenes.
//
// A dataset directory holds, per sample, <name>_left.ppm, <name>_right.ppm,
// <name>_disp.pfm (dense ground truth), <name>_occ.pgm and, for sparsified
// samples, <name>_valid.pgm. manifest.tsv lists them:
//
//   name  domain  seed  d_min  d_max  left  right  disparity  occlusion  valid
//
// with paths relative to the directory and "-" for a missing valid mask.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "srstereo/scene.hpp"
#include "srstereo/train.hpp"

namespace srstereo {

struct ManifestEntry {
  std::string name, domain;
  std::uint64_t seed = 0;
  double d_min = 0.0, d_max = 0.0;
  std::string left, right, disparity, occlusion, valid;  // valid may be "-"
};

struct DomainRequest {
  std::string label;
  SceneSpec spec;  // the domain's base spec; per-sample seeds derive from it
  int samples = 0;
  double drop_prob = 0.0;  // > 0 writes a sparsified validity mask
};

/// Generates every sample and writes files plus manifest.tsv. Returns the
/// manifest. The directory must be empty or absent unless `force`.
std::vector<ManifestEntry> write_dataset(const std::filesystem::path& dir, const std::vector<DomainRequest>& domains,
                                         bool force);

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir);

enum class GtUse { kDense, kSparseIfAvailable };

TrainingSample load_sample(const std::filesystem::path& dir, const ManifestEntry& e, GtUse use);

/// Loads all samples, optionally restricted to one domain label.
std::vector<TrainingSample> load_dataset(const std::filesystem::path& dir, GtUse use, const std::string& domain = "");

/// Labels in manifest order, without repeats.
std::vector<std::string> manifest_domains(const std::vector<ManifestEntry>& entries);

// Pseudo-label cache: <name>_edge.pfm (edge probabilities), <name>_valid.pgm
// (below-threshold pixels) and cache.txt recording the threshold, the
// SHA-256 of the generating checkpoint and the sample count.

void save_pseudo_label_cache(const std::filesystem::path& dir, const PseudoLabelCache& cache,
                             const std::vector<std::string>& names);
/// Rejects a missing or incomplete cache.
PseudoLabelCache load_pseudo_label_cache(const std::filesystem::path& dir, const std::vector<std::string>& names);

/// Sparsified copy of a dense sample's gt; edges come from the dense gt.
TrainingSample sparsify_sample(const TrainingSample& dense, double drop_prob, std::uint64_t seed);

}  // namespace srstereo
