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

#include "srstereo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace srstereo {

namespace {

void check(const Tensor& d_pred, const DisparityMap& d_gt) {
  require(d_pred.channels() == 1 && d_pred.height() == d_gt.height() && d_pred.width() == d_gt.width(),
          "metrics: prediction/gt shape mismatch");
  require(d_gt.valid.count() > 0, "metrics: ground truth has no valid pixels");
}

template <class F>
double valid_fraction(const Tensor& d_pred, const DisparityMap& d_gt, F counted) {
  check(d_pred, d_gt);
  std::size_t n = 0, hit = 0;
  for (std::size_t i = 0; i < d_pred.size(); ++i) {
    if (!d_gt.valid[i]) continue;
    ++n;
    hit += counted(std::abs(d_pred[i] - d_gt.values[i]), d_gt.values[i]) ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(n);
}

}  // namespace

double epe(const Tensor& d_pred, const DisparityMap& d_gt) {
  check(d_pred, d_gt);
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < d_pred.size(); ++i) {
    if (!d_gt.valid[i]) continue;
    s += std::abs(d_pred[i] - d_gt.values[i]);
    ++n;
  }
  return s / static_cast<double>(n);
}

double err_rate(const Tensor& d_pred, const DisparityMap& d_gt, double tau) {
  require(tau > 0.0, "err_rate: tau must be positive");
  return valid_fraction(d_pred, d_gt, [tau](double e, double) { return e > tau; });
}

double d1(const Tensor& d_pred, const DisparityMap& d_gt) {
  return valid_fraction(d_pred, d_gt, [](double e, double gt) { return e > 3.0 && e > 0.05 * gt; });
}

MetricReport evaluate_region(const Tensor& d_pred, const DisparityMap& d_gt, const Mask& region) {
  DisparityMap sub = d_gt;
  for (std::size_t i = 0; i < sub.valid.size(); ++i) sub.valid.set(i, d_gt.valid[i] && region[i]);
  MetricReport r;
  r.pixels = sub.valid.count();
  const std::size_t region_pixels = region.count();
  r.gt_density = region_pixels ? static_cast<double>(r.pixels) / static_cast<double>(region_pixels) : 0.0;
  if (r.pixels == 0) return r;
  r.epe = epe(d_pred, sub);
  for (double t : kErrorThresholds) r.err_rates[t] = err_rate(d_pred, sub, t);
  r.d1 = d1(d_pred, sub);
  return r;
}

Mask dilate3x3(const Mask& m) {
  Mask out(m.height(), m.width());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      bool v = false;
      for (int dy = -1; dy <= 1 && !v; ++dy)
        for (int dx = -1; dx <= 1 && !v; ++dx) {
          const int yy = y + dy, xx = x + dx;
          v = yy >= 0 && yy < m.height() && xx >= 0 && xx < m.width() && m.at(yy, xx);
        }
      out.set(y, x, v);
    }
  return out;
}

MetricReport region_split_eval(const Tensor& d_pred, const DisparityMap& d_gt, const Mask& edge_gt,
                               const Mask& occlusion) {
  require(edge_gt.height() == d_gt.height() && edge_gt.width() == d_gt.width() &&
              occlusion.height() == d_gt.height() && occlusion.width() == d_gt.width(),
          "region_split_eval: mask shape mismatch");
  const Mask all(d_gt.height(), d_gt.width(), true);
  MetricReport report = evaluate_region(d_pred, d_gt, all);
  require(report.pixels > 0, "region_split_eval: ground truth has no valid pixels");

  const Mask edge = dilate3x3(edge_gt);
  Mask non_edge(d_gt.height(), d_gt.width()), noc(d_gt.height(), d_gt.width());
  for (std::size_t i = 0; i < all.size(); ++i) {
    non_edge.set(i, !edge[i]);
    noc.set(i, !occlusion[i]);
  }
  const std::pair<const char*, const Mask*> regions[] = {
      {"all", &all}, {"edge", &edge}, {"non_edge", &non_edge}, {"noc", &noc}, {"occ", &occlusion}};
  for (const auto& [name, mask] : regions) {
    MetricReport r = evaluate_region(d_pred, d_gt, *mask);
    if (r.pixels == 0) {
      report.omitted.emplace_back(name);
      continue;
    }
    report.splits.emplace(name, std::move(r));
  }
  return report;
}

F1Result edge_f1(const Tensor& edge_pred, const Mask& edge_gt, double bin_thresh) {
  require(edge_pred.channels() == 1 && edge_pred.height() == edge_gt.height() &&
              edge_pred.width() == edge_gt.width(),
          "edge_f1: shape mismatch");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < edge_pred.size(); ++i) {
    const bool p = edge_pred[i] >= bin_thresh;
    const bool g = edge_gt[i];
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
  }
  F1Result r;
  if (tp + fn == 0) return r;
  r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  r.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.f1 = tp ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

std::vector<ReportRow> flatten(const std::string& sample, const std::string& domain, const MetricReport& r) {
  std::vector<ReportRow> rows;
  for (const char* name : {"all", "edge", "non_edge", "noc", "occ"}) {
    auto it = r.splits.find(name);
    if (it != r.splits.end()) rows.push_back({sample, domain, name, it->second});
  }
  return rows;
}

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(9) << v;
  return s.str();
}

}  // namespace

std::string per_sample_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "sample,domain,region,pixels,gt_density,epe,err_1px,err_2px,err_3px,d1\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << row.sample << ',' << row.domain << ',' << row.region << ',' << r.pixels << ',' << fmt(r.gt_density) << ','
        << fmt(r.epe);
    for (double t : kErrorThresholds) out << ',' << fmt(r.err_rates.at(t));
    out << ',' << fmt(r.d1) << '\n';
  }
  return out.str();
}

std::vector<AggregateRow> aggregate(const std::vector<ReportRow>& rows) {
  std::vector<AggregateRow> out;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const AggregateRow& a) { return a.domain == row.domain && a.region == row.region; });
    if (it == out.end()) {
      out.push_back({row.domain, row.region, 0, 0, 0.0, 0.0, {}});
      it = std::prev(out.end());
    }
    const auto& r = row.report;
    const double w = static_cast<double>(r.pixels);
    it->samples += 1;
    it->pixels += r.pixels;
    it->epe += r.epe * w;
    it->d1 += r.d1 * w;
    for (double t : kErrorThresholds) it->err_rates[t] += r.err_rates.at(t) * w;
  }
  for (auto& a : out) {
    const double n = a.pixels ? static_cast<double>(a.pixels) : 1.0;
    a.epe /= n;
    a.d1 /= n;
    for (auto& [t, v] : a.err_rates) v /= n;
  }
  return out;
}

const AggregateRow& find_aggregate(const std::vector<AggregateRow>& rows, const std::string& domain,
                                   const std::string& region) {
  auto it = std::find_if(rows.begin(), rows.end(),
                         [&](const AggregateRow& a) { return a.domain == domain && a.region == region; });
  require(it != rows.end(), "aggregate: no row for domain '" + domain + "' region '" + region + "'");
  return *it;
}

std::string aggregate_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "domain,region,samples,pixels,epe,err_1px,err_2px,err_3px,d1\n";
  for (const auto& a : aggregate(rows)) {
    out << a.domain << ',' << a.region << ',' << a.samples << ',' << a.pixels << ',' << fmt(a.epe);
    for (double t : kErrorThresholds) out << ',' << fmt(a.err_rates.at(t));
    out << ',' << fmt(a.d1) << '\n';
  }
  return out.str();
}

}  // namespace srstereo
