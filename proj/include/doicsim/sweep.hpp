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

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "doicsim/engine.hpp"
#include "doicsim/rng.hpp"

namespace doicsim {

enum class SweepAxis { kLambda, kV };

struct SweepRequest {
  Scenario base;
  SweepAxis axis = SweepAxis::kLambda;
  std::vector<double> values;
  int replicates = 1;
  int workers = 1;
};

struct SweepPointResult {
  double value = 0.0;
  int replicate = 0;
  std::optional<SimReport> report;
  std::string error;  // nonempty when the point failed
};

inline Scenario scenario_for_point(const Scenario& base, SweepAxis axis,
                                   double value, int replicate) {
  Scenario sc = base;
  sc.seed = replicate_seed(base.seed, replicate);
  switch (axis) {
    case SweepAxis::kLambda:
      for (UserSpec& u : sc.users) u.arrival_rate = value;
      break;
    case SweepAxis::kV:
      sc.control.v = value;
      break;
  }
  return sc;
}

// Runs one report per (value, replicate), ordered by value then replicate.
// Replicate seeds derive from the base seed; sweep values share a
// replicate's streams, which keeps curves comparable point to point. The
// service-rate estimate depends only on the radio setup and the replicate
// seed, so it is computed once per replicate and injected into every point.
// Per-point failures are recorded and the sweep continues.
inline std::vector<SweepPointResult> sweep(const SweepRequest& req) {
  if (req.values.empty()) throw ConfigError("sweep needs at least one value");
  if (req.replicates < 1) throw ConfigError("replicates must be positive");

  std::vector<std::vector<double>> mu_per_replicate(req.replicates);
  for (int rep = 0; rep < req.replicates; ++rep) {
    Scenario probe =
        scenario_for_point(req.base, req.axis, req.values.front(), rep);
    mu_per_replicate[rep] = probe.mu_override.empty()
                                ? estimate_scenario_mu(probe)
                                : probe.mu_override;
  }

  std::vector<SweepPointResult> results(req.values.size() *
                                        static_cast<std::size_t>(req.replicates));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= results.size()) break;
      const std::size_t vi = idx / static_cast<std::size_t>(req.replicates);
      const int rep = static_cast<int>(idx % req.replicates);
      SweepPointResult& out = results[idx];
      out.value = req.values[vi];
      out.replicate = rep;
      try {
        Scenario sc =
            scenario_for_point(req.base, req.axis, req.values[vi], rep);
        sc.mu_override = mu_per_replicate[rep];
        out.report = run(sc);
      } catch (const std::exception& e) {
        out.error = e.what();
      }
    }
  };

  const int workers = std::max(1, req.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return results;
}

}  // namespace doicsim
