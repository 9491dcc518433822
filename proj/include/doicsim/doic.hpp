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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "doicsim/cost.hpp"
#include "doicsim/rng.hpp"

namespace doicsim {

// Per-user delay-debt accumulator. y collects, frame by frame, the realized
// waits in excess of the auxiliary target r; keeping it mean-rate stable is
// what enforces the average-delay bound.
struct VirtualQueue {
  double y = 0.0;
  double r = 0.0;            // auxiliary delay target, in [0, delay_bound]
  double delay_bound = 0.0;  // d_i, slot units
  double arrival_rate = 0.0; // packets per slot

  static VirtualQueue initial(double delay_bound, double arrival_rate) {
    // Zero debt and the loosest feasible target: the first frame runs as if
    // unconstrained.
    return VirtualQueue{0.0, delay_bound, delay_bound, arrival_rate};
  }
};

// Priority order frozen for one frame.
struct PriorityList {
  std::vector<int> order;  // user indices, highest priority first
  std::int64_t frame_index = 0;
};

struct ControlParams {
  double v = 1e3;            // drift-vs-penalty weight
  CostSpec default_cost;     // h_i when a user gives no override
  double tolerance = 1e-2;   // scalar-minimizer tolerance

  void validate() const {
    if (!(v > 0.0)) throw ConfigError("v must be positive");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  }
};

// Sorts users by descending y*mu; ties break toward the lower user index so
// the order is deterministic (startup ties at y = 0 are common).
inline PriorityList build_priority_list(std::span<const double> y,
                                        std::span<const double> mu,
                                        std::int64_t frame_index) {
  if (y.size() != mu.size() || y.empty())
    throw SimError("priority list needs equal-length nonempty y and mu");
  PriorityList list;
  list.frame_index = frame_index;
  list.order.resize(y.size());
  std::iota(list.order.begin(), list.order.end(), 0);
  std::stable_sort(list.order.begin(), list.order.end(), [&](int a, int b) {
    return y[a] * mu[a] > y[b] * mu[b];
  });
  return list;
}

// First user in priority order with a servable packet; empty when all
// buffers are empty (idle slot).
inline std::optional<int> schedule_slot(
    const PriorityList& list, std::span<const std::uint64_t> servable) {
  for (int user : list.order) {
    if (servable[static_cast<std::size_t>(user)] > 0) return user;
  }
  return std::nullopt;
}

// Frame-close debt update from the ledger totals: y' = max(0, y + sum(W) -
// count*r) over the packets that arrived during the closed frame.
inline void update_virtual_queue(VirtualQueue& vq, double frame_delay_sum,
                                 std::uint64_t frame_arrivals) {
  vq.y = std::max(0.0, vq.y + frame_delay_sum -
                           static_cast<double>(frame_arrivals) * vq.r);
}

inline void update_virtual_queue(VirtualQueue& vq,
                                 std::span<const double> frame_delays) {
  double sum = 0.0;
  for (double w : frame_delays) sum += w;
  update_virtual_queue(vq, sum, frame_delays.size());
}

// Golden-section minimizer for a unimodal function on [lo, hi]. Runs a fixed
// iteration budget, which lands well inside any practical tolerance; the
// configured tolerance is a ceiling asserted by tests, not a knob this
// routine needs.
template <typename Fn>
double golden_section_min(Fn&& f, double lo, double hi, int iterations = 90) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iterations && b - a > 0.0; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

// Picks the next frame's target r = argmin over [0, d] of v*h(r) - y*lambda*r.
// The quadratic-half cost has the closed form clamp(y*lambda/v, 0, d); any
// other convex cost goes through the scalar minimizer.
inline void update_auxiliary(VirtualQueue& vq, const CostSpec& cost,
                             const ControlParams& params) {
  const double d = vq.delay_bound;
  if (cost.is_quadratic_half()) {
    vq.r = std::clamp(vq.y * vq.arrival_rate / params.v, 0.0, d);
    return;
  }
  const double y_lambda = vq.y * vq.arrival_rate;
  vq.r = golden_section_min(
      [&](double r) { return params.v * cost.value(r) - y_lambda * r; }, 0.0,
      d);
}

// Diagnostic-only snapshot of the Lyapunov function across one frame close.
struct LyapunovSnapshot {
  double l = 0.0;               // 0.5 * sum y^2 before the update
  double drift_estimate = 0.0;  // 0.5 * sum (y_next^2 - y^2)
  double penalty = 0.0;         // v * sum h_i(r_i) * frame_slots
};

inline LyapunovSnapshot lyapunov_snapshot(std::span<const double> y,
                                          std::span<const double> y_next,
                                          std::span<const double> r,
                                          std::int64_t frame_slots,
                                          const ControlParams& params,
                                          std::span<const CostSpec> costs) {
  if (y.size() != y_next.size() || y.size() != r.size() ||
      y.size() != costs.size())
    throw SimError("lyapunov_snapshot: mismatched vector lengths");
  LyapunovSnapshot snap;
  for (std::size_t i = 0; i < y.size(); ++i) {
    snap.l += 0.5 * y[i] * y[i];
    snap.drift_estimate += 0.5 * (y_next[i] * y_next[i] - y[i] * y[i]);
    snap.penalty += costs[i].value(r[i]);
  }
  snap.penalty *= params.v * static_cast<double>(frame_slots);
  return snap;
}

// Closed-form expected frame length 1/((1 - sum lambda_i/mu_i)(1 - sum
// lambda_i)). Diagnostic comparator only; the formula mixes normalized and
// absolute rates as inherited, so empirical agreement is logged, never
// asserted.
inline double expected_frame_length(std::span<const double> lambda,
                                    std::span<const double> mu) {
  if (lambda.size() != mu.size())
    throw SimError("expected_frame_length: mismatched vector lengths");
  double load = 0.0, total_lambda = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    load += lambda[i] / mu[i];
    total_lambda += lambda[i];
  }
  const double f1 = 1.0 - load;
  const double f2 = 1.0 - total_lambda;
  if (!(f1 > 0.0) || !(f2 > 0.0))
    throw SimError("expected_frame_length: outside stability region");
  return 1.0 / (f1 * f2);
}

}  // namespace doicsim
