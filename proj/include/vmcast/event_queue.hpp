#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vmcast/packet.hpp"
#include "vmcast/sim_time.hpp"

namespace vmcast {

enum class EventKind : std::uint8_t {
  RadioDeliver,
  Timer,
  MobilityTick,
  SessionJoin,
  SessionLeave,
  TrafficEmit,
  RadioTransmit,
};

struct Event {
  SimTime fire_at;
  std::uint64_t seq = 0;  // assigned by the queue
  EventKind kind = EventKind::Timer;
  NodeId node = kNoNode;  // receiver / timer owner / session node
  NodeId from = kNoNode;  // transmitter for RadioDeliver
  std::uint32_t timer_id = 0;
  std::uint64_t arg = 0;
  PacketPtr packet;
};

struct EventHandle {
  std::uint64_t seq = 0;
  bool valid() const { return seq != 0; }
};

/// Binary-heap event queue ordered by (fire_at, seq). Equal-time events fire
/// in insertion order.
class EventQueue {
 public:
  /// Throws Error(PastEvent) when fire_at precedes the clock.
  EventHandle schedule(Event ev);
  /// Returns false if the event already fired or was cancelled.
  bool cancel(EventHandle h);
  /// Pops the next live event with fire_at <= limit and advances the clock to it.
  std::optional<Event> pop_until(SimTime limit);
  std::optional<Event> pop();

  SimTime now() const { return now_; }
  bool empty() const { return pending() == 0; }
  std::size_t pending() const { return heap_.size() - cancelled_in_heap_; }
  std::uint64_t scheduled_total() const { return next_seq_ - 1; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.seq > b.seq;
    }
  };

  std::vector<Event> heap_;
  // done_[seq] is set once an event fired or was cancelled.
  std::vector<bool> done_{false};
  std::size_t cancelled_in_heap_ = 0;
  SimTime now_;
  std::uint64_t next_seq_ = 1;
};

}  // namespace vmcast
