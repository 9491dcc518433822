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
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "doicsim/channel.hpp"
#include "doicsim/cost.hpp"
#include "doicsim/doic.hpp"
#include "doicsim/queueing.hpp"
#include "doicsim/rng.hpp"

namespace doicsim {

enum class CsiMode { kPerfect, kImperfect };
enum class ServiceModel { kFloor, kFractional };
enum class ZeroRatePolicy { kHold, kSkip };
enum class MuMode { kFixed, kPerFrame };

struct UserSpec {
  FadingProfile fading;
  double arrival_rate = 0.5;  // packets per slot
  double delay_bound = 3.0;   // slot units
  CostSpec cost;
};

struct Scenario {
  std::vector<UserSpec> users;
  RadioParams radio;
  ControlParams control;
  std::int64_t horizon_slots = 2'000'000;
  std::uint64_t seed = 1;
  CsiMode mode = CsiMode::kPerfect;
  std::int64_t f_max = 100'000;          // forced frame close
  double warmup_fraction = 0.1;          // served packets dropped from means
  std::int64_t mu_samples = 1'000'000;
  MuMode mu_mode = MuMode::kFixed;
  ServiceModel service_model = ServiceModel::kFloor;
  ZeroRatePolicy zero_rate_policy = ZeroRatePolicy::kHold;
  double stability_threshold = 1e-2;     // terminal Y/K flag level
  std::vector<double> mu_override;       // precomputed service rates, or empty

  void validate() const {
    if (users.empty()) throw ConfigError("scenario needs at least one user");
    radio.validate();
    control.validate();
    for (const UserSpec& u : users) {
      u.fading.validate();
      if (!(u.arrival_rate >= 0.0))
        throw ConfigError("arrival_rate must be nonnegative");
      if (!(u.delay_bound > 0.0))
        throw ConfigError("delay_bound must be positive");
      u.cost.validate(std::max(10.0, 2.0 * u.delay_bound));
    }
    if (horizon_slots < 1) throw ConfigError("horizon must be positive");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
      throw ConfigError("warmup_fraction must be in [0,1)");
    if (f_max < 2) throw ConfigError("f_max must be at least 2");
    if (mu_samples < 10000)
      throw ConfigError("mu_samples must be at least 1e4");
    if (mode == CsiMode::kPerfect && radio.csi_error_bound != 0.0)
      throw ConfigError("perfect-CSI mode requires csi_error_bound = 0");
    if (mode == CsiMode::kImperfect && !(radio.csi_error_bound > 0.0))
      throw ConfigError("imperfect-CSI mode requires csi_error_bound > 0");
    if (!mu_override.empty() && mu_override.size() != users.size())
      throw ConfigError("mu_override length must match user count");
  }
};

struct SimReport {
  std::vector<double> per_user_delay;   // trimmed means, slot units
  std::vector<double> per_user_cost;    // h_i(delay_i)
  double sum_cost = 0.0;
  double max_interference_seen = 0.0;
  std::vector<bool> delay_bound_violations;
  double mean_frame_length = 0.0;
  std::vector<double> y_over_k_terminal;
  std::int64_t slots_simulated = 0;

  // diagnostics
  std::vector<double> mu;               // service rates the run used
  std::vector<std::uint64_t> served;
  std::vector<std::uint64_t> arrivals;
  std::vector<std::uint64_t> residual_queue;
  std::int64_t frames_closed = 0;
  std::int64_t forced_closes = 0;
  std::uint64_t proxied_packets = 0;
  std::vector<double> y_scale;          // max Y seen per user
  std::vector<double> y_over_k_slope;   // trend over final quarter of frames
  std::vector<double> r_weighted_bound; // arrival-weighted mean r per user
  double expected_frame_len = std::numeric_limits<double>::quiet_NaN();
  double mean_drift = 0.0;
  double mean_penalty = 0.0;
};

struct PacketTraceRow {
  int user = 0;  // 1-based in output
  double arrival_time = 0.0;
  std::int64_t served_slot = 0;
  double delay = 0.0;
};

struct FrameTraceRow {
  std::int64_t k = 0;       // closed frame index
  std::int64_t slots = 0;
  bool forced = false;
  std::vector<double> y;    // state after the close
  std::vector<double> r;
  std::vector<int> order;   // list used during frame k
  double lyapunov_l = 0.0;  // L at the new state
};

struct SlotTraceRow {
  std::int64_t slot = 0;
  int scheduled = -1;  // -1 when idle
  std::vector<int> arrivals;
  int served = 0;
  double power = 0.0;
  double interference = 0.0;  // power * true interference gain
  double rate = 0.0;
  std::vector<std::uint64_t> queue_after;  // backlog entering next slot
};

struct TraceHooks {
  std::function<void(const PacketTraceRow&)> packet;
  std::function<void(const FrameTraceRow&)> frame;
  std::function<void(const SlotTraceRow&)> slot;
};

// Service-rate estimates for every user of a scenario, from dedicated
// streams so the estimate never disturbs the simulation sample paths.
inline std::vector<double> estimate_scenario_mu(const Scenario& sc) {
  std::vector<double> mu;
  mu.reserve(sc.users.size());
  for (std::size_t i = 0; i < sc.users.size(); ++i) {
    Rng channel = make_stream(sc.seed, static_cast<int>(i),
                              StreamPurpose::kServiceRate);
    Rng csi(derive_seed(sc.seed, i + 1,
                        static_cast<std::uint64_t>(StreamPurpose::kServiceRate) |
                            0x100));
    mu.push_back(estimate_service_rate(sc.users[i].fading, sc.radio,
                                       sc.mu_samples, channel, csi));
  }
  return mu;
}

namespace detail {

// Least-squares slope of y against x.
inline double lsq_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return den > 0.0 ? num / den : 0.0;
}

class Simulation {
 public:
  Simulation(const Scenario& sc, const TraceHooks* hooks)
      : sc_(sc), hooks_(hooks), n_(sc.users.size()) {
    sc_.validate();
    mu_ = sc_.mu_override.empty() ? estimate_scenario_mu(sc_)
                                  : sc_.mu_override;
    mu_initial_ = mu_;
    queues_.resize(n_);
    credits_.assign(n_, 0.0);
    inv_rate_sum_.assign(n_, 0.0);
    tx_slots_.assign(n_, 0);
    y_over_k_.resize(n_);
    y_scale_.assign(n_, 0.0);
    r_bound_num_.assign(n_, 0.0);
    r_bound_den_.assign(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const UserSpec& u = sc_.users[i];
      vq_.push_back(VirtualQueue::initial(u.delay_bound, u.arrival_rate));
      arrival_rng_.push_back(
          make_stream(sc_.seed, static_cast<int>(i), StreamPurpose::kArrivals));
      channel_rng_.push_back(
          make_stream(sc_.seed, static_cast<int>(i), StreamPurpose::kChannel));
      csi_rng_.push_back(
          make_stream(sc_.seed, static_cast<int>(i), StreamPurpose::kCsiError));
      if (u.arrival_rate > 0.0)
        poisson_.emplace_back(std::poisson_distribution<int>(u.arrival_rate));
      else
        poisson_.emplace_back(std::nullopt);
    }
    list_ = build_priority_list(current_y(), mu_, 0);
  }

  SimReport run() {
    std::vector<std::uint64_t> servable(n_, 0);
    std::vector<int> slot_arrivals(n_, 0);
    for (std::int64_t slot = 0; slot < sc_.horizon_slots; ++slot) {
      // Arrivals join mid-slot; they become servable from the next boundary.
      for (std::size_t i = 0; i < n_; ++i) {
        servable[i] = queues_[i].buffer.size();
        slot_arrivals[i] =
            poisson_[i] ? generate_arrivals_into(queues_[i], *poisson_[i], slot,
                                                 static_cast<int>(i),
                                                 frame_.frame_index,
                                                 arrival_rng_[i])
                        : 0;
      }

      const Transmission tx = transmit(servable, slot);

      std::uint64_t total_queued = 0;
      for (const UserQueue& q : queues_) total_queued += q.buffer.size();

      if (hooks_ && hooks_->slot) {
        SlotTraceRow row;
        row.slot = slot;
        row.scheduled = tx.user;
        row.arrivals = slot_arrivals;
        row.served = tx.served;
        row.power = tx.power;
        row.interference = tx.interference;
        row.rate = tx.rate;
        for (const UserQueue& q : queues_)
          row.queue_after.push_back(q.buffer.size());
        hooks_->slot(row);
      }

      if (auto closed = update_frame(frame_, total_queued, slot, sc_.f_max))
        close_frame(*closed, slot);

      for (std::size_t i = 0; i < n_; ++i) {
        if (queues_[i].buffer.size() !=
            queues_[i].arrivals_count - queues_[i].served_count)
          throw SimError("queue conservation violated at slot " +
                         std::to_string(slot));
      }
    }
    return report();
  }

 private:
  struct Transmission {
    int user = -1;
    int served = 0;
    double power = 0.0;
    double interference = 0.0;
    double rate = 0.0;
  };

  std::vector<double> current_y() const {
    std::vector<double> y(n_);
    for (std::size_t i = 0; i < n_; ++i) y[i] = vq_[i].y;
    return y;
  }

  // Walks the frozen priority list; the first user with a servable packet
  // gets the slot. Under the skip policy a user whose whole-packet capacity
  // is zero passes the slot down the list; under hold it keeps the slot and
  // sends nothing.
  Transmission transmit(std::span<const std::uint64_t> servable,
                        std::int64_t slot) {
    Transmission tx;
    for (int user : list_.order) {
      const std::size_t i = static_cast<std::size_t>(user);
      if (servable[i] == 0) continue;
      const ChannelDraw draw = sample_channel(sc_.users[i].fading, sc_.radio,
                                              channel_rng_[i], csi_rng_[i]);
      const double power =
          allocate_power(draw.estimated_interference_gain, sc_.radio);
      const double interference = power * draw.interference_gain;
      if (interference > max_interference_) max_interference_ = interference;
      if (interference > sc_.radio.interference_cap)
        throw SimError("interference cap violated at slot " +
                       std::to_string(slot));
      double rate =
          transmission_rate(power, draw.estimated_direct_gain, sc_.radio);
      inv_rate_sum_[i] += 1.0 / rate;
      tx_slots_[i] += 1;
      double capacity = rate;
      if (sc_.service_model == ServiceModel::kFractional)
        capacity += credits_[i];
      if (std::floor(capacity) < 1.0 &&
          sc_.zero_rate_policy == ZeroRatePolicy::kSkip) {
        // Fractional credit does not accrue for a user that never got on air.
        continue;
      }
      PacketSink sink;
      const PacketSink* sink_ptr = nullptr;
      if (hooks_ && hooks_->packet) {
        sink = [&](const Packet& p, double delay) {
          hooks_->packet(PacketTraceRow{p.user + 1, p.arrival_time, slot, delay});
        };
        sink_ptr = &sink;
      }
      const int served =
          serve_slot(queues_[i], capacity, slot, frame_.frame_index, sink_ptr);
      if (sc_.service_model == ServiceModel::kFractional) {
        const double whole = std::floor(capacity);
        credits_[i] = served == static_cast<int>(whole) ? capacity - whole : 0.0;
      }
      tx = Transmission{user, served, power, interference, rate};
      break;
    }
    return tx;
  }

  void close_frame(const ClosedFrame& closed, std::int64_t slot) {
    if (closed.forced) {
      forced_closes_ += 1;
      // Unserved packets of the closing frame contribute their wait so far
      // as a lower-bound proxy; their tag is cleared so later service does
      // not double-count them.
      const double now = static_cast<double>(slot) + 1.0;
      for (UserQueue& q : queues_) {
        for (Packet& p : q.buffer) {
          if (p.arrival_frame != closed.index) continue;
          q.frame_delay_sum += now - p.arrival_time;
          q.frame_arrivals += 1;
          proxied_packets_ += 1;
          p.arrival_frame = -1;
        }
      }
    }
    const std::vector<double> y_prev = current_y();
    std::vector<double> r_during(n_);
    for (std::size_t i = 0; i < n_; ++i) r_during[i] = vq_[i].r;
    for (std::size_t i = 0; i < n_; ++i) {
      UserQueue& q = queues_[i];
      r_bound_num_[i] += static_cast<double>(q.frame_arrivals) * vq_[i].r;
      r_bound_den_[i] += static_cast<double>(q.frame_arrivals);
      update_virtual_queue(vq_[i], q.frame_delay_sum, q.frame_arrivals);
      q.reset_frame_ledger();
    }
    const std::vector<double> y_next = current_y();
    std::vector<CostSpec> costs(n_);
    for (std::size_t i = 0; i < n_; ++i) costs[i] = sc_.users[i].cost;
    const LyapunovSnapshot snap =
        lyapunov_snapshot(y_prev, y_next, r_during, closed.slots, sc_.control,
                          costs);
    drift_sum_ += snap.drift_estimate;
    penalty_sum_ += snap.penalty;

    const double k = static_cast<double>(closed.index) + 1.0;
    for (std::size_t i = 0; i < n_; ++i) {
      y_over_k_[i].push_back(vq_[i].y / k);
      if (vq_[i].y > y_scale_[i]) y_scale_[i] = vq_[i].y;
      update_auxiliary(vq_[i], sc_.users[i].cost, sc_.control);
    }
    if (sc_.mu_mode == MuMode::kPerFrame) {
      for (std::size_t i = 0; i < n_; ++i) {
        if (tx_slots_[i] >= 32)
          mu_[i] = static_cast<double>(tx_slots_[i]) / inv_rate_sum_[i];
        else
          mu_[i] = mu_initial_[i];
      }
    }
    frames_closed_ += 1;
    frame_slots_sum_ += closed.slots;
    list_ = build_priority_list(y_next, mu_, closed.index + 1);

    if (hooks_ && hooks_->frame) {
      FrameTraceRow row;
      row.k = closed.index;
      row.slots = closed.slots;
      row.forced = closed.forced;
      row.y = y_next;
      for (std::size_t i = 0; i < n_; ++i) row.r.push_back(vq_[i].r);
      row.order = list_.order;
      double l = 0.0;
      for (double y : y_next) l += 0.5 * y * y;
      row.lyapunov_l = l;
      hooks_->frame(row);
    }
  }

  SimReport report() const {
    SimReport rep;
    rep.slots_simulated = sc_.horizon_slots;
    rep.mu = mu_;
    rep.max_interference_seen = max_interference_;
    rep.frames_closed = frames_closed_;
    rep.forced_closes = forced_closes_;
    rep.proxied_packets = proxied_packets_;
    rep.mean_frame_length =
        frames_closed_ > 0
            ? static_cast<double>(frame_slots_sum_) / frames_closed_
            : 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const UserQueue& q = queues_[i];
      const std::size_t n_served = q.served_delays.size();
      const std::size_t skip = static_cast<std::size_t>(
          sc_.warmup_fraction * static_cast<double>(n_served));
      double mean = 0.0;
      if (n_served > skip) {
        double sum = 0.0;
        for (std::size_t j = skip; j < n_served; ++j)
          sum += q.served_delays[j];
        mean = sum / static_cast<double>(n_served - skip);
      }
      rep.per_user_delay.push_back(mean);
      rep.per_user_cost.push_back(sc_.users[i].cost.value(mean));
      rep.sum_cost += rep.per_user_cost.back();
      rep.delay_bound_violations.push_back(mean > sc_.users[i].delay_bound);
      rep.served.push_back(q.served_count);
      rep.arrivals.push_back(q.arrivals_count);
      rep.residual_queue.push_back(q.buffer.size());
      rep.y_scale.push_back(y_scale_[i]);
      const std::vector<double>& series = y_over_k_[i];
      rep.y_over_k_terminal.push_back(series.empty() ? 0.0 : series.back());
      if (series.size() >= 8) {
        const std::size_t start = series.size() - series.size() / 4;
        std::vector<double> xs;
        xs.reserve(series.size() - start);
        for (std::size_t j = start; j < series.size(); ++j)
          xs.push_back(static_cast<double>(j + 1));
        rep.y_over_k_slope.push_back(lsq_slope(
            xs, std::span<const double>(series).subspan(start)));
      } else {
        rep.y_over_k_slope.push_back(0.0);
      }
      rep.r_weighted_bound.push_back(
          r_bound_den_[i] > 0.0 ? r_bound_num_[i] / r_bound_den_[i]
                                : std::numeric_limits<double>::quiet_NaN());
    }
    std::vector<double> lambda(n_);
    for (std::size_t i = 0; i < n_; ++i) lambda[i] = sc_.users[i].arrival_rate;
    try {
      rep.expected_frame_len = expected_frame_length(lambda, mu_);
    } catch (const SimError&) {
      // outside the formula's stability region; leave NaN
    }
    if (frames_closed_ > 0) {
      rep.mean_drift = drift_sum_ / static_cast<double>(frames_closed_);
      rep.mean_penalty = penalty_sum_ / static_cast<double>(frames_closed_);
    }
    return rep;
  }

  Scenario sc_;
  const TraceHooks* hooks_ = nullptr;
  std::size_t n_ = 0;
  std::vector<double> mu_, mu_initial_;
  std::vector<UserQueue> queues_;
  std::vector<VirtualQueue> vq_;
  std::vector<Rng> arrival_rng_, channel_rng_, csi_rng_;
  std::vector<std::optional<std::poisson_distribution<int>>> poisson_;
  std::vector<double> credits_;
  std::vector<double> inv_rate_sum_;
  std::vector<std::int64_t> tx_slots_;
  FrameState frame_;
  PriorityList list_;
  std::vector<std::vector<double>> y_over_k_;
  std::vector<double> y_scale_;
  std::vector<double> r_bound_num_, r_bound_den_;
  double max_interference_ = 0.0;
  std::int64_t frames_closed_ = 0;
  std::int64_t frame_slots_sum_ = 0;
  std::int64_t forced_closes_ = 0;
  std::uint64_t proxied_packets_ = 0;
  double drift_sum_ = 0.0;
  double penalty_sum_ = 0.0;
};

}  // namespace detail

// Runs one scenario end to end. Deterministic given the scenario (seed
// included): repeated calls produce identical reports.
inline SimReport run(const Scenario& scenario,
                     const TraceHooks* hooks = nullptr) {
  detail::Simulation sim(scenario, hooks);
  return sim.run();
}

}  // namespace doicsim
