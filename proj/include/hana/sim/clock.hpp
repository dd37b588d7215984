#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

namespace hana {

using Millis = std::int64_t;

/// Deterministic logical clock with a time-ordered event queue.
/// Events at equal timestamps run in insertion (FIFO) order.
class SimClock {
 public:
  void schedule(Millis t, std::function<void()> fn) {
    queue_.push(Entry{t, next_seq_++, std::move(fn)});
  }

  void schedule_in(Millis delta, std::function<void()> fn) {
    schedule(now_ + delta, std::move(fn));
  }

  Millis now() const { return now_; }

  bool empty() const { return queue_.empty(); }

  /// Runs every event with timestamp <= until, then sets now = until.
  /// Time never moves backwards; until < now is a no-op.
  void run_until(Millis until) {
    while (!queue_.empty() && queue_.top().t <= until) {
      Entry e = queue_.top();
      queue_.pop();
      if (e.t > now_) now_ = e.t;
      e.fn();
    }
    if (until > now_) now_ = until;
  }

 private:
  struct Entry {
    Millis t;
    std::uint64_t seq;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.t != b.t) return a.t > b.t;
      return a.seq > b.seq;
    }
  };

  Millis now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
};

}  // namespace hana
