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
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "doicsim/rng.hpp"

namespace doicsim {

// A packet with its continuous arrival timestamp (slot units). Packets are
// tagged with the frame they arrived in; the tag drives the per-frame
// delay-debt ledger and is cleared once a forced frame close consumed the
// packet's contribution.
struct Packet {
  double arrival_time = 0.0;
  int user = 0;
  std::int64_t arrival_frame = 0;
};

// Per-user FIFO buffer plus running delay accounting.
//
// frame_delay_sum / frame_arrivals form the ledger for the virtual-queue
// update of the frame currently open: the sum of realized waits of packets
// that arrived in this frame, and the count of such packets whose wait has
// been realized (served, or proxied at a forced close).
struct UserQueue {
  std::deque<Packet> buffer;
  double cumulative_delay = 0.0;
  std::uint64_t arrivals_count = 0;
  std::uint64_t served_count = 0;
  double frame_delay_sum = 0.0;
  std::uint64_t frame_arrivals = 0;
  std::vector<double> served_delays;  // in service order, for trimmed means

  void reset_frame_ledger() {
    frame_delay_sum = 0.0;
    frame_arrivals = 0;
  }
};

// Poisson arrivals for one slot, timestamps uniform inside the slot, sorted.
inline int generate_arrivals_into(UserQueue& queue,
                                  std::poisson_distribution<int>& count_dist,
                                  std::int64_t slot, int user,
                                  std::int64_t frame, Rng& rng) {
  const int count = count_dist(rng);
  if (count == 0) return 0;
  std::uniform_real_distribution<double> offset(0.0, 1.0);
  const std::size_t first = queue.buffer.size();
  for (int i = 0; i < count; ++i) {
    queue.buffer.push_back(
        Packet{static_cast<double>(slot) + offset(rng), user, frame});
  }
  std::sort(queue.buffer.begin() + first, queue.buffer.end(),
            [](const Packet& a, const Packet& b) {
              return a.arrival_time < b.arrival_time;
            });
  queue.arrivals_count += static_cast<std::uint64_t>(count);
  return count;
}

inline std::vector<Packet> generate_arrivals(double rate, std::int64_t slot,
                                             int user, Rng& rng,
                                             std::int64_t frame = 0) {
  if (!(rate > 0.0)) throw ConfigError("arrival rate must be positive");
  UserQueue scratch;
  std::poisson_distribution<int> dist(rate);
  generate_arrivals_into(scratch, dist, slot, user, frame, rng);
  return {scratch.buffer.begin(), scratch.buffer.end()};
}

// Number of buffered packets servable at the given slot boundary, i.e. that
// arrived strictly before it. The buffer is sorted by arrival time, so this
// is a prefix length.
inline std::uint64_t servable_count(const UserQueue& queue,
                                    std::int64_t slot) {
  const double boundary = static_cast<double>(slot);
  auto it = std::lower_bound(
      queue.buffer.begin(), queue.buffer.end(), boundary,
      [](const Packet& p, double s) { return p.arrival_time < s; });
  return static_cast<std::uint64_t>(it - queue.buffer.begin());
}

using PacketSink = std::function<void(const Packet&, double delay)>;

// Serves min(floor(rate_packets), servable backlog) packets FIFO. Each
// served packet's wait is the time from arrival up to the start of the
// transmitting slot; the transmission slot itself is not counted. The wait
// is added to the open-frame ledger only if the packet arrived in the frame
// currently open (current_frame); packets consumed by an earlier forced
// close carry a cleared tag and are skipped.
inline int serve_slot(UserQueue& queue, double rate_packets, std::int64_t slot,
                      std::int64_t current_frame,
                      const PacketSink* sink = nullptr) {
  const std::uint64_t servable = servable_count(queue, slot);
  const double capacity = std::floor(rate_packets);
  std::uint64_t count = servable;
  if (capacity < static_cast<double>(servable))
    count = capacity <= 0.0 ? 0 : static_cast<std::uint64_t>(capacity);
  for (std::uint64_t i = 0; i < count; ++i) {
    const Packet packet = queue.buffer.front();
    queue.buffer.pop_front();
    const double delay = static_cast<double>(slot) - packet.arrival_time;
    queue.cumulative_delay += delay;
    queue.served_count += 1;
    queue.served_delays.push_back(delay);
    if (packet.arrival_frame == current_frame) {
      queue.frame_delay_sum += delay;
      queue.frame_arrivals += 1;
    }
    if (sink) (*sink)(packet, delay);
  }
  return static_cast<int>(count);
}

// Mean wait over all served packets. Errors out rather than reporting a
// fake zero when nothing was served.
inline double average_delay(const UserQueue& queue) {
  if (queue.served_count == 0) throw SimError("no packets served");
  return queue.cumulative_delay / static_cast<double>(queue.served_count);
}

// Frame bookkeeping. A frame is one idle period (consecutive slots with all
// buffers empty at the slot start) followed by one busy period; it closes
// when the total backlog returns to zero, or forcibly after f_max slots.
struct FrameState {
  enum class Phase { kIdle, kBusy };

  std::int64_t frame_index = 0;
  Phase phase = Phase::kIdle;
  std::int64_t frame_start_slot = 0;
  std::int64_t slots_in_frame = 0;
};

struct ClosedFrame {
  std::int64_t index = 0;
  std::int64_t slots = 0;
  std::int64_t start_slot = 0;
  bool forced = false;
};

// Advances the frame state by one slot. total_queued is the backlog after
// the slot's arrivals and service, i.e. the queue entering the next slot.
// Returns the closed frame's summary when this slot ended it.
inline std::optional<ClosedFrame> update_frame(FrameState& frame,
                                               std::uint64_t total_queued,
                                               std::int64_t slot,
                                               std::int64_t f_max) {
  frame.slots_in_frame += 1;
  bool closed = false;
  bool forced = false;
  if (frame.phase == FrameState::Phase::kIdle) {
    if (total_queued > 0) frame.phase = FrameState::Phase::kBusy;
  } else if (total_queued == 0) {
    closed = true;
  }
  if (!closed && frame.slots_in_frame >= f_max) {
    closed = true;
    forced = true;
  }
  if (!closed) return std::nullopt;
  const ClosedFrame info{frame.frame_index, frame.slots_in_frame,
                         frame.frame_start_slot, forced};
  frame.frame_index += 1;
  frame.frame_start_slot = slot + 1;
  frame.slots_in_frame = 0;
  frame.phase = total_queued > 0 ? FrameState::Phase::kBusy
                                 : FrameState::Phase::kIdle;
  return info;
}

}  // namespace doicsim
