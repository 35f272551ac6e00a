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

// Disparity and edge quality metrics.
//
// Report CSV columns (per-sample file, one row per sample and region):
//   sample,domain,region,pixels,gt_density,epe,err_1px,err_2px,err_3px,d1
// Aggregate CSV columns (one row per domain and region, pixel-weighted):
//   domain,region,samples,pixels,epe,err_1px,err_2px,err_3px,d1

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srstereo/tensor.hpp"

namespace srstereo {

/// Error thresholds (px) reported in every MetricReport.
inline const std::vector<double> kErrorThresholds = {1.0, 2.0, 3.0};

double epe(const Tensor& d_pred, const DisparityMap& d_gt);
/// Fraction of valid pixels with |error| > tau (strict).
double err_rate(const Tensor& d_pred, const DisparityMap& d_gt, double tau);
/// Fraction of valid pixels with |error| > 3 and |error| > 0.05 d_gt.
double d1(const Tensor& d_pred, const DisparityMap& d_gt);

struct MetricReport {
  std::size_t pixels = 0;
  double epe = 0.0;
  double gt_density = 0.0;
  std::map<double, double> err_rates;
  double d1 = 0.0;
  std::map<std::string, MetricReport> splits;
  std::vector<std::string> omitted;  // regions left out because they were empty
};

/// Metrics restricted to gt-valid pixels inside `region`.
MetricReport evaluate_region(const Tensor& d_pred, const DisparityMap& d_gt, const Mask& region);

/// 3x3 binary dilation, one iteration.
Mask dilate3x3(const Mask& m);

/// Report for the whole image with splits all / edge / non-edge / noc / occ.
/// The edge band is edge_gt dilated once by a 3x3 element.
MetricReport region_split_eval(const Tensor& d_pred, const DisparityMap& d_gt, const Mask& edge_gt,
                               const Mask& occlusion);

struct F1Result {
  std::optional<double> f1;  // empty when gt has no edges
  double precision = 0.0, recall = 0.0;
};

F1Result edge_f1(const Tensor& edge_pred, const Mask& edge_gt, double bin_thresh);

// ---- CSV -----------------------------------------------------------------

struct ReportRow {
  std::string sample, domain, region;
  MetricReport report;
};

/// Pixel-weighted pooling of rows sharing a domain and region.
struct AggregateRow {
  std::string domain, region;
  std::size_t samples = 0, pixels = 0;
  double epe = 0.0, d1 = 0.0;
  std::map<double, double> err_rates;
};

std::vector<ReportRow> flatten(const std::string& sample, const std::string& domain, const MetricReport& r);
/// Rows in first-seen (domain, region) order.
std::vector<AggregateRow> aggregate(const std::vector<ReportRow>& rows);
const AggregateRow& find_aggregate(const std::vector<AggregateRow>& rows, const std::string& domain,
                                   const std::string& region);
std::string per_sample_csv(const std::vector<ReportRow>& rows);
std::string aggregate_csv(const std::vector<ReportRow>& rows);

}  // namespace srstereo
