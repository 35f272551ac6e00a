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

#include "srstereo/dataset.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include "srstereo/backbone.hpp"
#include "srstereo/io.hpp"

namespace fs = std::filesystem;

namespace srstereo {

namespace {

constexpr const char* kManifest = "manifest.tsv";
constexpr const char* kHeader = "name\tdomain\tseed\td_min\td_max\tleft\tright\tdisparity\tocclusion\tvalid";

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, '\t')) out.push_back(cur);
  return out;
}

Tensor as_tensor(const Mask& m) {
  Tensor t(1, m.height(), m.width());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = m[i] ? 1.0 : 0.0;
  return t;
}

}  // namespace

std::vector<ManifestEntry> write_dataset(const fs::path& dir, const std::vector<DomainRequest>& domains, bool force) {
  require(!domains.empty(), "gen-scenes: no domains requested");
  std::set<std::string> labels;
  for (const auto& d : domains) {
    require(!d.label.empty() && d.label.find_first_of("\t\n/ ") == std::string::npos,
            "gen-scenes: domain label '" + d.label + "' must be non-empty without whitespace or '/'");
    require(labels.insert(d.label).second, "gen-scenes: duplicate domain label '" + d.label + "'");
    require(d.samples >= 1, "gen-scenes: domain '" + d.label + "' requests no samples");
    require(d.drop_prob >= 0.0 && d.drop_prob <= 1.0, "gen-scenes: drop_prob outside [0, 1]");
    d.spec.validate();
  }
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    require(force, "gen-scenes: output directory " + dir.string() + " is not empty (use --force)");
    for (const auto& entry : fs::directory_iterator(dir)) fs::remove_all(entry.path());
  }
  fs::create_directories(dir);

  std::vector<ManifestEntry> manifest;
  std::ostringstream text;
  text << kHeader << '\n';
  for (const auto& d : domains) {
    for (int i = 0; i < d.samples; ++i) {
      const SceneSpec spec = sample_spec(d.spec, i);
      const StereoSample s = generate_scene(spec);
      std::ostringstream name;
      name << d.label << '_' << std::setw(5) << std::setfill('0') << i;
      ManifestEntry e;
      e.name = name.str();
      e.domain = d.label;
      e.seed = spec.seed;
      e.d_min = spec.d_min;
      e.d_max = spec.d_max;
      e.left = e.name + "_left.ppm";
      e.right = e.name + "_right.ppm";
      e.disparity = e.name + "_disp.pfm";
      e.occlusion = e.name + "_occ.pgm";
      e.valid = "-";
      io::write_ppm(dir / e.left, s.left);
      io::write_ppm(dir / e.right, s.right);
      io::write_pfm(dir / e.disparity, s.disparity_gt.values);
      io::write_pgm(dir / e.occlusion, s.occlusion);
      if (d.drop_prob > 0.0) {
        const Tensor edges = edge_gt_extract(s.disparity_gt).values;
        const DisparityMap sparse = sparsify_gt(s.disparity_gt, edges, d.drop_prob, mix_seed(spec.seed, 0xd409));
        e.valid = e.name + "_valid.pgm";
        io::write_pgm(dir / e.valid, sparse.valid);
      }
      text << e.name << '\t' << e.domain << '\t' << e.seed << '\t' << num(e.d_min) << '\t' << num(e.d_max) << '\t'
           << e.left << '\t' << e.right << '\t' << e.disparity << '\t' << e.occlusion << '\t' << e.valid << '\n';
      manifest.push_back(std::move(e));
    }
  }
  io::write_text(dir / kManifest, text.str());
  return manifest;
}

std::vector<ManifestEntry> read_manifest(const fs::path& dir) {
  const fs::path path = dir / kManifest;
  require(fs::exists(path), "dataset: no manifest at " + path.string());
  std::istringstream in(io::read_text(path));
  std::string line;
  std::getline(in, line);
  require(line == kHeader, "dataset: unexpected manifest header in " + path.string());
  std::vector<ManifestEntry> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    require(f.size() == 10, "dataset: manifest line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                                " fields, expected 10");
    ManifestEntry e;
    e.name = f[0];
    e.domain = f[1];
    try {
      e.seed = std::stoull(f[2]);
      e.d_min = std::stod(f[3]);
      e.d_max = std::stod(f[4]);
    } catch (const std::exception&) {
      throw ContractError("dataset: malformed number on manifest line " + std::to_string(lineno));
    }
    e.left = f[5];
    e.right = f[6];
    e.disparity = f[7];
    e.occlusion = f[8];
    e.valid = f[9];
    out.push_back(std::move(e));
  }
  require(!out.empty(), "dataset: manifest " + path.string() + " lists no samples");
  return out;
}

TrainingSample load_sample(const fs::path& dir, const ManifestEntry& e, GtUse use) {
  TrainingSample t;
  t.name = e.name;
  t.domain = e.domain;
  t.left = io::read_ppm(dir / e.left);
  t.right = io::read_ppm(dir / e.right);
  const DisparityMap dense = DisparityMap::dense(io::read_pfm(dir / e.disparity));
  t.occlusion = io::read_pgm(dir / e.occlusion);
  require(t.left.same_shape(t.right) && dense.height() == t.left.height() && dense.width() == t.left.width() &&
              t.occlusion.height() == dense.height() && t.occlusion.width() == dense.width(),
          "dataset: sample " + e.name + " has inconsistent file sizes");
  t.edge_gt = edge_mask(edge_gt_extract(dense));
  t.gt = dense;
  if (use == GtUse::kSparseIfAvailable && e.valid != "-") {
    t.gt.valid = io::read_pgm(dir / e.valid);
    require(t.gt.valid.height() == dense.height() && t.gt.valid.width() == dense.width(),
            "dataset: validity mask of " + e.name + " has the wrong size");
  }
  t.levels = disparity_levels(e.d_max);
  return t;
}

std::vector<TrainingSample> load_dataset(const fs::path& dir, GtUse use, const std::string& domain) {
  std::vector<TrainingSample> out;
  for (const auto& e : read_manifest(dir))
    if (domain.empty() || e.domain == domain) out.push_back(load_sample(dir, e, use));
  require(!out.empty(), "dataset: no samples for domain '" + domain + "' in " + dir.string());
  return out;
}

std::vector<std::string> manifest_domains(const std::vector<ManifestEntry>& entries) {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (std::find(out.begin(), out.end(), e.domain) == out.end()) out.push_back(e.domain);
  return out;
}

void save_pseudo_label_cache(const fs::path& dir, const PseudoLabelCache& cache,
                             const std::vector<std::string>& names) {
  require(names.size() == cache.labels.size(), "pseudo-label cache: name/label count mismatch");
  fs::create_directories(dir);
  for (std::size_t i = 0; i < names.size(); ++i) {
    io::write_pfm(dir / (names[i] + "_edge.pfm"), cache.labels[i].values);
    io::write_pgm(dir / (names[i] + "_valid.pgm"), cache.labels[i].valid);
  }
  std::ostringstream side;
  side << "threshold " << num(cache.threshold) << "\nsource_checkpoint " << cache.source_checkpoint << "\nsamples "
       << names.size() << '\n';
  io::write_text(dir / "cache.txt", side.str());
}

PseudoLabelCache load_pseudo_label_cache(const fs::path& dir, const std::vector<std::string>& names) {
  const fs::path side = dir / "cache.txt";
  require(fs::exists(side), "pseudo-label cache is missing at " + dir.string());
  std::istringstream in(io::read_text(side));
  PseudoLabelCache c;
  std::string k1, k2, k3;
  std::size_t n = 0;
  in >> k1 >> c.threshold >> k2 >> c.source_checkpoint >> k3 >> n;
  require(in && k1 == "threshold" && k2 == "source_checkpoint" && k3 == "samples",
          "pseudo-label cache: malformed " + side.string());
  require(n == names.size(), "pseudo-label cache: holds " + std::to_string(n) + " samples, expected " +
                                 std::to_string(names.size()));
  for (const auto& name : names) {
    PseudoLabel p;
    p.values = io::read_pfm(dir / (name + "_edge.pfm"));
    p.valid = io::read_pgm(dir / (name + "_valid.pgm"));
    p.threshold = c.threshold;
    require(p.valid.height() == p.values.height() && p.valid.width() == p.values.width(),
            "pseudo-label cache: size mismatch for " + name);
    c.labels.push_back(std::move(p));
  }
  return c;
}

TrainingSample sparsify_sample(const TrainingSample& dense, double drop_prob, std::uint64_t seed) {
  TrainingSample t = dense;
  t.gt = sparsify_gt(dense.gt, as_tensor(dense.edge_gt), drop_prob, seed);
  return t;
}

}  // namespace srstereo
