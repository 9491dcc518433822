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

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doicsim/engine.hpp"
#include "doicsim/rng.hpp"

namespace doicsim {

// Plain key=value configuration. Lines are `key = value`; blank lines and
// `#` comments are skipped. Unknown and duplicate keys are rejected so a
// typo cannot silently fall back to a default.
class ConfigMap {
 public:
  static ConfigMap parse_text(const std::string& text) {
    ConfigMap map;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string stripped = strip(line);
      if (stripped.empty() || stripped[0] == '#') continue;
      const std::size_t eq = stripped.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(line_no) +
                          ": expected key=value");
      const std::string key = strip(stripped.substr(0, eq));
      const std::string value = strip(stripped.substr(eq + 1));
      if (key.empty())
        throw ConfigError("line " + std::to_string(line_no) + ": empty key");
      if (value.empty())
        throw ConfigError("line " + std::to_string(line_no) +
                          ": empty value for key '" + key + "'");
      if (map.entries_.count(key))
        throw ConfigError("line " + std::to_string(line_no) +
                          ": duplicate key '" + key + "'");
      map.entries_[key] = Entry{value, line_no, false};
    }
    return map;
  }

  static ConfigMap parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& dflt) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return dflt;
    it->second.used = true;
    return it->second.value;
  }

  double get_double(const std::string& key, double dflt) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return dflt;
    it->second.used = true;
    return parse_double(it->second);
  }

  std::int64_t get_int(const std::string& key, std::int64_t dflt) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return dflt;
    it->second.used = true;
    const Entry& e = it->second;
    char* end = nullptr;
    const long long v = std::strtoll(e.value.c_str(), &end, 10);
    if (end == e.value.c_str() || *end != '\0')
      throw ConfigError("line " + std::to_string(e.line) +
                        ": invalid integer for key '" + key + "'");
    return v;
  }

  std::uint64_t get_uint(const std::string& key, std::uint64_t dflt) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return dflt;
    it->second.used = true;
    const Entry& e = it->second;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(e.value.c_str(), &end, 10);
    if (end == e.value.c_str() || *end != '\0' || e.value[0] == '-')
      throw ConfigError("line " + std::to_string(e.line) +
                        ": invalid unsigned integer for key '" + key + "'");
    return v;
  }

  void reject_unused() const {
    for (const auto& [key, entry] : entries_) {
      if (!entry.used)
        throw ConfigError("line " + std::to_string(entry.line) +
                          ": unknown key '" + key + "'");
    }
  }

 private:
  struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
  };

  double parse_double(const Entry& e) const {
    char* end = nullptr;
    const double v = std::strtod(e.value.c_str(), &end);
    if (end == e.value.c_str() || *end != '\0')
      throw ConfigError("line " + std::to_string(e.line) +
                        ": invalid number");
    return v;
  }

  static std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, Entry> entries_;
};

struct ResolvedConfig {
  Scenario scenario;
  int replicates = 5;
};

// Builds a validated Scenario from a parsed config map. Scalar keys apply to
// all users; `<key>_<i>` (1-based) overrides one user. Every omitted key
// takes its documented default, and the resolved values are echoed into the
// run manifest by echo_scenario().
inline ResolvedConfig resolve_config(ConfigMap& map) {
  ResolvedConfig out;
  Scenario& sc = out.scenario;

  const std::int64_t n_users = map.get_int("users", 2);
  if (n_users < 1) throw ConfigError("users must be at least 1");

  const std::string mode = map.get_string("csi_mode", "perfect");
  if (mode == "perfect")
    sc.mode = CsiMode::kPerfect;
  else if (mode == "imperfect")
    sc.mode = CsiMode::kImperfect;
  else
    throw ConfigError("csi_mode must be 'perfect' or 'imperfect'");

  sc.radio.bandwidth_slots = map.get_double("bandwidth_slots", 10.0);
  sc.radio.interference_cap = map.get_double("i_inst", 5.0);
  sc.radio.max_power = map.get_double("p_max", 10.0);
  const double default_error = sc.mode == CsiMode::kImperfect ? 0.1 : 0.0;
  sc.radio.csi_error_bound = map.get_double("csi_error_bound", default_error);
  sc.radio.csi_backoff =
      map.get_double("csi_backoff", 1.0 + sc.radio.csi_error_bound);

  sc.control.v = map.get_double("v", 1e3);
  sc.control.tolerance = map.get_double("tolerance", 1e-2);
  sc.control.default_cost =
      CostSpec::parse(map.get_string("cost", "quadratic_half"));

  sc.horizon_slots = map.get_int("horizon", 2'000'000);
  sc.seed = map.get_uint("seed", 1);
  sc.f_max = map.get_int("f_max", 100'000);
  sc.warmup_fraction = map.get_double("warmup_fraction", 0.1);
  sc.mu_samples = map.get_int("mu_samples", 1'000'000);
  sc.stability_threshold = map.get_double("stability_threshold", 1e-2);

  const std::string mu_mode = map.get_string("mu_mode", "fixed");
  if (mu_mode == "fixed")
    sc.mu_mode = MuMode::kFixed;
  else if (mu_mode == "per_frame")
    sc.mu_mode = MuMode::kPerFrame;
  else
    throw ConfigError("mu_mode must be 'fixed' or 'per_frame'");

  const std::string service = map.get_string("service_model", "floor");
  if (service == "floor")
    sc.service_model = ServiceModel::kFloor;
  else if (service == "fractional")
    sc.service_model = ServiceModel::kFractional;
  else
    throw ConfigError("service_model must be 'floor' or 'fractional'");

  const std::string zero_rate = map.get_string("zero_rate_policy", "hold");
  if (zero_rate == "hold")
    sc.zero_rate_policy = ZeroRatePolicy::kHold;
  else if (zero_rate == "skip")
    sc.zero_rate_policy = ZeroRatePolicy::kSkip;
  else
    throw ConfigError("zero_rate_policy must be 'hold' or 'skip'");

  const double lambda_all = map.get_double("lambda", 0.5);
  const double gamma_bar_all = map.get_double("gamma_bar", 1.0);
  const double g_bar_all = map.get_double("g_bar", 2.0);
  const double gamma_min_all = map.get_double("gamma_min", 1e-3);
  const double d_all = map.get_double("d", 3.0);
  const std::string cost_all = map.get_string("cost", "quadratic_half");

  for (std::int64_t i = 1; i <= n_users; ++i) {
    const std::string suffix = "_" + std::to_string(i);
    UserSpec u;
    u.arrival_rate = map.get_double("lambda" + suffix, lambda_all);
    u.fading.mean_direct_gain =
        map.get_double("gamma_bar" + suffix, gamma_bar_all);
    u.fading.mean_interference_gain = map.get_double("g_bar" + suffix, g_bar_all);
    u.fading.direct_gain_floor = map.get_double("gamma_min" + suffix, gamma_min_all);
    u.delay_bound = map.get_double("d" + suffix, d_all);
    u.cost = CostSpec::parse(map.get_string("cost" + suffix, cost_all));
    sc.users.push_back(u);
  }

  const std::int64_t reps = map.get_int("replicates", 5);
  if (reps < 1) throw ConfigError("replicates must be positive");
  out.replicates = static_cast<int>(reps);

  map.reject_unused();
  sc.validate();
  return out;
}

// Loads and validates one scenario from a config file.
inline Scenario load_config(const std::string& path) {
  ConfigMap map = ConfigMap::parse_file(path);
  return resolve_config(map).scenario;
}

namespace detail {
inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}
}  // namespace detail

// Canonical key=value dump of a fully resolved scenario; every parameter
// that can affect results appears here.
inline std::string echo_scenario(const Scenario& sc, int replicates) {
  std::ostringstream os;
  os << "users = " << sc.users.size() << '\n';
  os << "horizon = " << sc.horizon_slots << '\n';
  os << "seed = " << sc.seed << '\n';
  os << "replicates = " << replicates << '\n';
  os << "warmup_fraction = " << detail::fmt_g(sc.warmup_fraction) << '\n';
  os << "f_max = " << sc.f_max << '\n';
  os << "v = " << detail::fmt_g(sc.control.v) << '\n';
  os << "tolerance = " << detail::fmt_g(sc.control.tolerance) << '\n';
  os << "bandwidth_slots = " << detail::fmt_g(sc.radio.bandwidth_slots) << '\n';
  os << "i_inst = " << detail::fmt_g(sc.radio.interference_cap) << '\n';
  os << "p_max = " << detail::fmt_g(sc.radio.max_power) << '\n';
  os << "csi_mode = "
     << (sc.mode == CsiMode::kPerfect ? "perfect" : "imperfect") << '\n';
  os << "csi_error_bound = " << detail::fmt_g(sc.radio.csi_error_bound) << '\n';
  os << "csi_backoff = " << detail::fmt_g(sc.radio.csi_backoff) << '\n';
  os << "mu_samples = " << sc.mu_samples << '\n';
  os << "mu_mode = " << (sc.mu_mode == MuMode::kFixed ? "fixed" : "per_frame")
     << '\n';
  os << "service_model = "
     << (sc.service_model == ServiceModel::kFloor ? "floor" : "fractional")
     << '\n';
  os << "zero_rate_policy = "
     << (sc.zero_rate_policy == ZeroRatePolicy::kHold ? "hold" : "skip")
     << '\n';
  os << "stability_threshold = " << detail::fmt_g(sc.stability_threshold)
     << '\n';
  for (std::size_t i = 0; i < sc.users.size(); ++i) {
    const UserSpec& u = sc.users[i];
    const std::string suffix = "_" + std::to_string(i + 1);
    os << "lambda" << suffix << " = " << detail::fmt_g(u.arrival_rate) << '\n';
    os << "gamma_bar" << suffix << " = "
       << detail::fmt_g(u.fading.mean_direct_gain) << '\n';
    os << "g_bar" << suffix << " = "
       << detail::fmt_g(u.fading.mean_interference_gain) << '\n';
    os << "gamma_min" << suffix << " = "
       << detail::fmt_g(u.fading.direct_gain_floor) << '\n';
    os << "d" << suffix << " = " << detail::fmt_g(u.delay_bound) << '\n';
    os << "cost" << suffix << " = " << u.cost.to_string() << '\n';
  }
  return os.str();
}

}  // namespace doicsim
