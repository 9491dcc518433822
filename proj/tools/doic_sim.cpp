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

#include <cstdint>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "doicsim/build_info.hpp"
#include "doicsim/presets.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Discrete-time simulator of an uplink multi-user underlay cell driven "
      "by the DOIC joint power-control and scheduling algorithm"};

  std::string preset = "custom";
  std::string out_dir = "out";
  std::string config_path;
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  std::uint64_t seed = 0;
  std::int64_t horizon = 0;
  int replicates = 0;
  bool trace = false;

  app.add_option("--config", config_path, "Key=value configuration file");
  app.add_option("--preset", preset,
                 "Experiment preset: fig2, fig3, vsweep, csi, custom")
      ->check(CLI::IsMember({"fig2", "fig3", "vsweep", "csi", "custom"}));
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--workers", workers, "Parallel sweep workers")
      ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Base RNG seed");
  auto* horizon_opt =
      app.add_option("--horizon", horizon, "Slots per run")
          ->check(CLI::PositiveNumber);
  auto* reps_opt =
      app.add_option("--replicates", replicates, "Replicates per sweep point")
          ->check(CLI::PositiveNumber);
  app.add_flag("--trace", trace,
               "Write per-packet and per-frame logs (custom preset)");

  CLI11_PARSE(app, argc, argv);

  doicsim::PresetOptions opts;
  opts.out_dir = out_dir;
  opts.workers = workers;
  opts.trace = trace;
  if (!config_path.empty()) opts.config_path = config_path;
  if (seed_opt->count() > 0) opts.seed = seed;
  if (horizon_opt->count() > 0) opts.horizon = horizon;
  if (reps_opt->count() > 0) opts.replicates = replicates;

  try {
    return doicsim::run_preset(preset, opts, doicsim::kBuildId);
  } catch (const doicsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return doicsim::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return doicsim::kExitError;
  }
}
