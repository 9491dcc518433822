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
//
// Test-only reference implementations. These stay independent of the
// engine's slot loop: the queue oracle is event-driven over a precomputed
// arrival path, and the service-rate oracle integrates the truncated joint
// fading density by quadrature instead of sampling it.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "doicsim/channel.hpp"
#include "doicsim/rng.hpp"

namespace doicsim::testing {

// Single-server FIFO queue with slot-quantized service: packets arrive at
// continuous times, and at each integer boundary with waiting work the
// server ships up to capacity(t) packets that arrived strictly before t,
// each recording a wait of t minus its arrival time. Event-driven: jumps
// straight to the next boundary after the next arrival whenever the backlog
// empties. capacity(t) is invoked exactly once per boundary with waiting
// work, in increasing t.
struct EventQueueResult {
  std::vector<double> delays;  // in service order
  std::uint64_t served = 0;
};

inline EventQueueResult event_driven_queue(
    const std::vector<double>& arrivals, std::int64_t horizon,
    const std::function<std::int64_t(std::int64_t)>& capacity) {
  EventQueueResult result;
  std::size_t head = 0;
  if (arrivals.empty()) return result;
  std::int64_t t =
      static_cast<std::int64_t>(std::floor(arrivals.front())) + 1;
  while (t < horizon && head < arrivals.size()) {
    if (arrivals[head] >= static_cast<double>(t)) {
      t = static_cast<std::int64_t>(std::floor(arrivals[head])) + 1;
      continue;
    }
    std::size_t waiting = head;
    while (waiting < arrivals.size() &&
           arrivals[waiting] < static_cast<double>(t))
      ++waiting;
    const std::int64_t backlog = static_cast<std::int64_t>(waiting - head);
    std::int64_t m = capacity(t);
    if (m > backlog) m = backlog;
    for (std::int64_t i = 0; i < m; ++i) {
      result.delays.push_back(static_cast<double>(t) - arrivals[head]);
      ++head;
    }
    result.served += static_cast<std::uint64_t>(m > 0 ? m : 0);
    t += 1;
  }
  return result;
}

// Composite Simpson rule with n subintervals (n even).
template <typename Fn>
double simpson(Fn&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// E[1/rate] for one user under the power policy with perfect CSI, by nested
// quadrature over the truncated joint density. The direct gain is an
// exponential clamped below at the floor (point mass at the floor plus the
// exponential tail); the power rule switches branches at
// interference_cap/max_power, so the interference integral is split there.
// Both continuous coordinates are integrated on log grids, where the
// integrands are smooth.
inline double expected_inverse_rate_quadrature(const FadingProfile& profile,
                                               const RadioParams& radio,
                                               int resolution = 2048) {
  const double gbar = profile.mean_interference_gain;
  const double ybar = profile.mean_direct_gain;
  const double floor_gain = profile.direct_gain_floor;
  const double cap = radio.interference_cap;
  const double pmax = radio.max_power;
  const double bw = radio.bandwidth_slots;

  const auto inv_rate = [&](double gamma, double power) {
    return 1.0 / (bw * std::log1p(power * gamma));
  };

  // Interference-gain expectation of 1/rate at a fixed direct gain.
  const auto over_g = [&](double gamma) {
    const double g_switch = cap / pmax;
    // g <= g_switch: power pinned at pmax, integrand constant in g.
    const double mass_low = 1.0 - std::exp(-g_switch / gbar);
    double total = mass_low * inv_rate(gamma, pmax);
    // g > g_switch: power = cap/g; integrate on t with g = g_switch * e^t.
    const double t_hi = std::log(60.0 * gbar / g_switch);
    total += simpson(
        [&](double t) {
          const double g = g_switch * std::exp(t);
          const double weight = std::exp(-g / gbar) / gbar * g;  // dg = g dt
          return inv_rate(gamma, cap / g) * weight;
        },
        0.0, t_hi, resolution);
    return total;
  };

  // Point mass where the raw draw fell at or below the floor.
  const double mass_floor = 1.0 - std::exp(-floor_gain / ybar);
  double expectation = mass_floor * over_g(floor_gain);

  // Continuous part on x with gamma = floor * e^x.
  const double x_hi = std::log(60.0 * ybar / floor_gain);
  expectation += simpson(
      [&](double x) {
        const double gamma = floor_gain * std::exp(x);
        const double weight = std::exp(-gamma / ybar) / ybar * gamma;
        return over_g(gamma) * weight;
      },
      0.0, x_hi, resolution);
  return expectation;
}

inline double service_rate_quadrature(const FadingProfile& profile,
                                      const RadioParams& radio,
                                      int resolution = 2048) {
  return 1.0 / expected_inverse_rate_quadrature(profile, radio, resolution);
}

}  // namespace doicsim::testing
