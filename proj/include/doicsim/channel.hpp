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
#include <string>

#include "doicsim/rng.hpp"

namespace doicsim {

// Block-fading profile of one user: exponential direct and interference
// gains. The direct gain is clamped below at direct_gain_floor so that the
// reciprocal service-time moments stay finite.
struct FadingProfile {
  double mean_direct_gain = 1.0;         // mean of the gain toward the BS
  double mean_interference_gain = 2.0;   // mean of the gain toward the PU
  double direct_gain_floor = 1e-3;

  void validate() const {
    if (!(mean_direct_gain > 0.0))
      throw ConfigError("mean_direct_gain must be positive");
    if (!(mean_interference_gain > 0.0))
      throw ConfigError("mean_interference_gain must be positive");
    if (!(direct_gain_floor > 0.0))
      throw ConfigError("direct_gain_floor must be positive");
    if (!(direct_gain_floor < mean_direct_gain))
      throw ConfigError("direct_gain_floor must be below mean_direct_gain");
  }
};

// One slot's channel state. Estimated gains equal the true ones under
// perfect CSI; under estimation error they are what the transmitter acts on.
struct ChannelDraw {
  double direct_gain = 0.0;
  double interference_gain = 0.0;
  double estimated_direct_gain = 0.0;
  double estimated_interference_gain = 0.0;
};

struct RadioParams {
  double bandwidth_slots = 10.0;   // packets servable per slot at unit spectral efficiency
  double max_power = 10.0;
  double interference_cap = 5.0;   // per-slot cap on power received at the PU
  double csi_backoff = 1.0;        // divisor applied to cap/gain under imperfect CSI
  double csi_error_bound = 0.0;    // relative estimation error bound, in [0,1)

  void validate() const {
    if (!(bandwidth_slots > 0.0))
      throw ConfigError("bandwidth_slots must be positive");
    if (!(max_power > 0.0)) throw ConfigError("max_power must be positive");
    if (!(interference_cap > 0.0))
      throw ConfigError("interference_cap must be positive");
    if (!(csi_backoff >= 1.0)) throw ConfigError("csi_backoff must be >= 1");
    if (!(csi_error_bound >= 0.0 && csi_error_bound < 1.0))
      throw ConfigError("csi_error_bound must be in [0,1)");
    if (csi_error_bound > 0.0 && csi_backoff < 1.0 + csi_error_bound)
      throw ConfigError("csi_backoff must be >= 1 + csi_error_bound");
  }
};

// Multiplicative estimation error: the true gain equals estimate*(1+e) with
// e uniform on [-bound, +bound), so the estimate is gain/(1+e). With
// csi_backoff >= 1+bound the allocated power then keeps the realized
// interference under the cap on every draw.
inline double model_csi_error(double true_gain, const RadioParams& params,
                              Rng& rng) {
  if (params.csi_error_bound <= 0.0) return true_gain;
  std::uniform_real_distribution<double> err(-params.csi_error_bound,
                                             params.csi_error_bound);
  return true_gain / (1.0 + err(rng));
}

// Draws one slot of fading. The channel stream supplies the two gains (direct
// first); the CSI stream supplies estimation errors when the error bound is
// nonzero.
inline ChannelDraw sample_channel(const FadingProfile& profile,
                                  const RadioParams& params, Rng& channel_rng,
                                  Rng& csi_rng) {
  ChannelDraw draw;
  std::exponential_distribution<double> direct(1.0 / profile.mean_direct_gain);
  std::exponential_distribution<double> interf(1.0 /
                                               profile.mean_interference_gain);
  draw.direct_gain = std::max(direct(channel_rng), profile.direct_gain_floor);
  draw.interference_gain = interf(channel_rng);
  draw.estimated_direct_gain = model_csi_error(draw.direct_gain, params, csi_rng);
  draw.estimated_interference_gain =
      model_csi_error(draw.interference_gain, params, csi_rng);
  return draw;
}

// Packets per slot at the given power and direct gain (natural log).
inline double transmission_rate(double power, double direct_gain,
                                const RadioParams& params) {
  return params.bandwidth_slots * std::log1p(power * direct_gain);
}

// Interference-safe power rule: cap/(estimated gain * backoff), clipped at
// max_power. The nextafter loop keeps the allocation under the cap in
// floating point too, so the per-slot interference assertion never trips on
// rounding alone.
inline double allocate_power(double estimated_interference_gain,
                             const RadioParams& params) {
  const double denom = estimated_interference_gain * params.csi_backoff;
  double power =
      std::min(params.interference_cap / denom, params.max_power);
  while (power * estimated_interference_gain * params.csi_backoff >
         params.interference_cap) {
    power = std::nextafter(power, 0.0);
  }
  return power;
}

// Reciprocal-mean service rate over a set of draws: 1 / mean(1/rate), with
// the rate evaluated at the policy power and the estimated direct gain.
template <typename DrawFn>
double service_rate_from_draws(DrawFn&& next_draw, std::int64_t n_samples,
                               const RadioParams& params) {
  double inv_sum = 0.0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    const ChannelDraw draw = next_draw();
    const double power =
        allocate_power(draw.estimated_interference_gain, params);
    const double rate =
        transmission_rate(power, draw.estimated_direct_gain, params);
    inv_sum += 1.0 / rate;
  }
  return static_cast<double>(n_samples) / inv_sum;
}

// Monte-Carlo estimate of the per-user service rate (packets per slot)
// under the power policy. Deterministic given the streams.
inline double estimate_service_rate(const FadingProfile& profile,
                                    const RadioParams& params,
                                    std::int64_t n_samples, Rng& channel_rng,
                                    Rng& csi_rng) {
  if (n_samples < 10000)
    throw ConfigError("service-rate estimation needs at least 1e4 samples");
  if (!(profile.direct_gain_floor > 0.0))
    throw ConfigError(
        "service-rate estimation requires a positive direct_gain_floor "
        "(the reciprocal moment diverges without one)");
  return service_rate_from_draws(
      [&] { return sample_channel(profile, params, channel_rng, csi_rng); },
      n_samples, params);
}

}  // namespace doicsim
