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
#include <string>

#include "doicsim/rng.hpp"

namespace doicsim {

// Per-user cost function h(x) applied to the average delay. Must be convex
// and increasing on the delay-target interval; validate() enforces that
// numerically so misconfigured kinds are rejected up front.
struct CostSpec {
  enum class Kind { kQuadraticHalf, kPower, kLinear };

  Kind kind = Kind::kQuadraticHalf;
  double exponent = 2.0;  // only meaningful for kPower

  double value(double x) const {
    switch (kind) {
      case Kind::kQuadraticHalf:
        return 0.5 * x * x;
      case Kind::kPower:
        return std::pow(x, exponent) / exponent;
      case Kind::kLinear:
        return x;
    }
    return 0.0;
  }

  bool is_quadratic_half() const { return kind == Kind::kQuadraticHalf; }

  std::string to_string() const {
    switch (kind) {
      case Kind::kQuadraticHalf:
        return "quadratic_half";
      case Kind::kPower:
        return "power:" + format_exponent();
      case Kind::kLinear:
        return "linear";
    }
    return "?";
  }

  // Forward second-difference convexity test plus an increasing check on a
  // grid spanning [0, domain_upper].
  void validate(double domain_upper = 10.0) const {
    if (kind == Kind::kPower && !(exponent > 0.0)) {
      throw ConfigError("cost exponent must be positive");
    }
    const int n = 101;
    const double step = domain_upper / (n - 1);
    double prev = value(0.0);
    double prev_diff = 0.0;
    for (int i = 1; i < n; ++i) {
      const double cur = value(i * step);
      const double diff = cur - prev;
      if (diff <= 0.0) {
        throw ConfigError("cost function '" + to_string() +
                          "' is not increasing on [0, " +
                          std::to_string(domain_upper) + "]");
      }
      if (i >= 2 && diff + 1e-12 * (1.0 + std::fabs(cur)) < prev_diff) {
        throw ConfigError("cost function '" + to_string() +
                          "' is not convex on [0, " +
                          std::to_string(domain_upper) + "]");
      }
      prev = cur;
      prev_diff = diff;
    }
  }

  static CostSpec parse(const std::string& text) {
    if (text == "quadratic_half") return {Kind::kQuadraticHalf, 2.0};
    if (text == "linear") return {Kind::kLinear, 1.0};
    if (text.rfind("power:", 0) == 0) {
      CostSpec spec{Kind::kPower, 0.0};
      try {
        spec.exponent = std::stod(text.substr(6));
      } catch (const std::exception&) {
        throw ConfigError("bad cost exponent in '" + text + "'");
      }
      return spec;
    }
    throw ConfigError("unknown cost kind '" + text +
                      "' (expected quadratic_half, linear, or power:<p>)");
  }

 private:
  std::string format_exponent() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", exponent);
    return buf;
  }
};

// Evaluates h(w) for a nonnegative delay; the kind is assumed validated.
inline double cost_function(double w, const CostSpec& kind) {
  if (w < 0.0) throw SimError("cost_function: negative delay");
  return kind.value(w);
}

}  // namespace doicsim
