// Copyright 2026 the doicsim authors
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

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "doicsim/cost.hpp"
#include "doicsim/engine.hpp"

namespace doicsim {

// One sweep point aggregated over replicates.
struct CurvePoint {
  double x = 0.0;                        // lambda or V
  std::vector<double> per_user_delay;    // replicate means
  std::vector<double> ci_halfwidth;      // 95% half-widths per user
  double sum_cost = 0.0;                 // sum_i h_i(per_user_delay[i])
  double sum_cost_ci = 0.0;              // CI of per-replicate sum costs
  double max_interference = 0.0;         // max over replicates
};

namespace detail {

// Two-sided 97.5% Student-t quantiles for df 1..30; 1.96 beyond.
inline double t_quantile(int df) {
  static constexpr double kTable[30] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) return 0.0;
  if (df <= 30) return kTable[df - 1];
  return 1.96;
}

inline double ci_halfwidth(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= static_cast<double>(n - 1);
  return t_quantile(static_cast<int>(n) - 1) * std::sqrt(var) /
         std::sqrt(static_cast<double>(n));
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace detail

// Aggregates one sweep point's replicate reports: per-user replicate means
// with Student-t confidence half-widths. The point's sum_cost is recomputed
// from the mean delays so it stays exactly consistent with the delay
// columns; the spread of per-replicate sum costs is kept alongside for
// trend comparisons.
inline CurvePoint aggregate_point(double x, std::span<const SimReport> reps,
                                  std::span<const CostSpec> costs) {
  if (reps.empty()) throw SimError("aggregate_point: no replicate reports");
  const std::size_t n_users = reps.front().per_user_delay.size();
  if (costs.size() != n_users)
    throw SimError("aggregate_point: cost list length mismatch");
  CurvePoint point;
  point.x = x;
  std::vector<double> samples(reps.size());
  for (std::size_t u = 0; u < n_users; ++u) {
    for (std::size_t r = 0; r < reps.size(); ++r)
      samples[r] = reps[r].per_user_delay[u];
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    point.per_user_delay.push_back(mean);
    point.ci_halfwidth.push_back(detail::ci_halfwidth(samples));
  }
  for (std::size_t u = 0; u < n_users; ++u)
    point.sum_cost += costs[u].value(point.per_user_delay[u]);
  for (std::size_t r = 0; r < reps.size(); ++r)
    samples[r] = reps[r].sum_cost;
  point.sum_cost_ci = detail::ci_halfwidth(samples);
  for (const SimReport& rep : reps)
    point.max_interference =
        std::max(point.max_interference, rep.max_interference_seen);
  return point;
}

struct CurveDelta {
  double x = 0.0;
  double delta = 0.0;     // a.sum_cost - b.sum_cost
  double rel_pct = 0.0;   // 100 * delta / b.sum_cost (NaN when b is zero)
};

struct DominanceInterval {
  double x_lo = 0.0;
  double x_hi = 0.0;
  int sign = 0;  // +1: a above b, -1: a below b, 0: equal
};

struct CurveComparison {
  std::vector<CurveDelta> points;
  std::vector<DominanceInterval> dominance;
};

// Point-by-point comparison of two curves on the same x grid.
inline CurveComparison compare_curves(std::span<const CurvePoint> a,
                                      std::span<const CurvePoint> b) {
  if (a.size() != b.size())
    throw SimError("compare_curves: curves have different lengths");
  CurveComparison cmp;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].x != b[i].x)
      throw SimError("compare_curves: x grids differ at index " +
                     std::to_string(i));
    CurveDelta d;
    d.x = a[i].x;
    d.delta = a[i].sum_cost - b[i].sum_cost;
    d.rel_pct = b[i].sum_cost != 0.0
                    ? 100.0 * d.delta / b[i].sum_cost
                    : std::numeric_limits<double>::quiet_NaN();
    cmp.points.push_back(d);
  }
  for (std::size_t i = 0; i < cmp.points.size();) {
    const double delta = cmp.points[i].delta;
    const int sign = delta > 0.0 ? 1 : (delta < 0.0 ? -1 : 0);
    std::size_t j = i;
    while (j + 1 < cmp.points.size()) {
      const double next = cmp.points[j + 1].delta;
      const int next_sign = next > 0.0 ? 1 : (next < 0.0 ? -1 : 0);
      if (next_sign != sign) break;
      ++j;
    }
    cmp.dominance.push_back({cmp.points[i].x, cmp.points[j].x, sign});
    i = j + 1;
  }
  return cmp;
}

// CSV emission: header then one row per point, fixed column order, %.12g
// formatting so identical inputs yield identical bytes.
inline void write_curve_csv(std::ostream& os, std::span<const CurvePoint> curve,
                            std::size_t n_users) {
  os << "x";
  for (std::size_t u = 1; u <= n_users; ++u) os << ",w_user" << u;
  for (std::size_t u = 1; u <= n_users; ++u) os << ",ci_" << u;
  os << ",sum_cost,max_interference\n";
  for (const CurvePoint& p : curve) {
    os << detail::format_double(p.x);
    for (std::size_t u = 0; u < n_users; ++u)
      os << ',' << detail::format_double(p.per_user_delay[u]);
    for (std::size_t u = 0; u < n_users; ++u)
      os << ',' << detail::format_double(p.ci_halfwidth[u]);
    os << ',' << detail::format_double(p.sum_cost) << ','
       << detail::format_double(p.max_interference) << '\n';
  }
}

}  // namespace doicsim
