#include "vmcast/event_queue.hpp"

#include <algorithm>

#include "vmcast/error.hpp"

namespace vmcast {

EventHandle EventQueue::schedule(Event ev) {
  if (ev.fire_at < now_)
    throw Error(ErrorCode::PastEvent, "event scheduled at " + format_seconds(ev.fire_at) + " before clock " +
                                          format_seconds(now_));
  ev.seq = next_seq_++;
  done_.push_back(false);
  const EventHandle h{ev.seq};
  heap_.push_back(std::move(ev));
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  return h;
}

bool EventQueue::cancel(EventHandle h) {
  if (!h.valid() || h.seq >= next_seq_ || done_[h.seq]) return false;
  done_[h.seq] = true;
  ++cancelled_in_heap_;
  return true;
}

std::optional<Event> EventQueue::pop_until(SimTime limit) {
  while (!heap_.empty()) {
    if (heap_.front().fire_at > limit) return std::nullopt;
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Event ev = std::move(heap_.back());
    heap_.pop_back();
    if (done_[ev.seq]) {
      --cancelled_in_heap_;
      continue;
    }
    done_[ev.seq] = true;
    now_ = ev.fire_at;
    return ev;
  }
  return std::nullopt;
}

std::optional<Event> EventQueue::pop() { return pop_until(SimTime::from_micros(INT64_MAX)); }

}  // namespace vmcast
