/*
 * Copyright (c) 2026, the loopbench contributors.
 * All rights reserved.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <ostream>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "loopbench/types.hpp"

namespace loopbench {

enum class ActionKind { generic, measure, measure_send, send };

inline const char* to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::generic:
      return "generic";
    case ActionKind::measure:
      return "measure";
    case ActionKind::measure_send:
      return "measure_send";
    case ActionKind::send:
      return "send";
  }
  return "unknown";
}

// Tasks are classified as hard or soft time condition. The label is carried
// as metadata only; no deadline enforcement is attached to it.
enum class TimeCriticality { soft, hard };

/// Opaque action descriptor attached to an event. The scheduler never
/// interprets it; consumers (power metering, logs) do.
struct Action {
  ActionKind kind = ActionKind::generic;
  int step = -1;
  TimeCriticality criticality = TimeCriticality::soft;
};

using EventId = std::uint64_t;

/// A scheduled unit of work: when it should occur and how long it takes.
struct Event {
  EventId id = 0;  // assigned by the scheduler
  Micros occurrence_us = 0;
  Micros duration_us = 0;
  Action payload;
};

/// An executed event with its realized start and end. jitter = start -
/// occurrence and is never negative.
struct ScheduledEvent {
  Event event;
  Micros start_us = 0;
  Micros end_us = 0;
  Micros jitter_us = 0;
};

enum class ClockMode { virtual_clock, wall_clock };

/// Monotonic time source. In virtual mode, time advances only through
/// explicit calls; in wall mode it tracks the steady clock since creation.
class Clock {
 public:
  explicit Clock(ClockMode mode = ClockMode::virtual_clock)
      : mode_(mode), epoch_(std::chrono::steady_clock::now()) {}

  ClockMode mode() const { return mode_; }

  Micros now() const {
    if (mode_ == ClockMode::wall_clock) {
      auto elapsed = std::chrono::steady_clock::now() - epoch_;
      return std::chrono::duration_cast<std::chrono::microseconds>(elapsed)
          .count();
    }
    return now_;
  }

  void advance_to(Micros t) {
    if (mode_ == ClockMode::virtual_clock && t > now_) {
      now_ = t;
    }
  }

 private:
  ClockMode mode_;
  Micros now_ = 0;
  std::chrono::steady_clock::time_point epoch_;
};

/// Deterministic single-server FIFO event queue over a virtual clock.
/// Events execute in occurrence order, ties broken by insertion order; a
/// busy server delays later events, which shows up as jitter.
class Scheduler {
 public:
  static constexpr Micros kForever = std::numeric_limits<Micros>::max();

  Scheduler() : clock_(ClockMode::virtual_clock) {}

  EventId schedule(Event event) {
    if (event.occurrence_us < clock_.now()) {
      throw SchedulingInPast("occurrence " +
                             std::to_string(event.occurrence_us) +
                             "us is before clock " +
                             std::to_string(clock_.now()) + "us");
    }
    if (event.duration_us < 0) {
      throw Error("event duration must be non-negative");
    }
    event.id = next_id_++;
    queue_.push(QueueItem{event.occurrence_us, insert_seq_++, event});
    return event.id;
  }

  EventId schedule(Micros occurrence_us, Micros duration_us,
                   Action payload = {}) {
    return schedule(Event{0, occurrence_us, duration_us, payload});
  }

  /// Executes every event whose realized start time is <= t, in start order,
  /// and advances the clock to t. Returns the events executed by this call.
  std::vector<ScheduledEvent> run_until(Micros t) {
    if (t < clock_.now()) {
      throw Error("run_until target is before the current clock");
    }
    std::vector<ScheduledEvent> executed;
    while (!queue_.empty()) {
      const QueueItem& front = queue_.top();
      Micros start = std::max(front.occurrence_us, server_free_);
      if (start > t) {
        break;
      }
      ScheduledEvent done;
      done.event = front.event;
      done.start_us = start;
      done.end_us = start + front.event.duration_us;
      done.jitter_us = start - front.event.occurrence_us;
      queue_.pop();
      server_free_ = done.end_us;
      executed.push_back(done);
      log_.push_back(done);
    }
    clock_.advance_to(t);
    return executed;
  }

  /// Drains the queue completely; the clock ends at the last event's end.
  std::vector<ScheduledEvent> run_all() {
    std::vector<ScheduledEvent> executed;
    while (!queue_.empty()) {
      const QueueItem& front = queue_.top();
      Micros start = std::max(front.occurrence_us, server_free_);
      ScheduledEvent done;
      done.event = front.event;
      done.start_us = start;
      done.end_us = start + front.event.duration_us;
      done.jitter_us = start - front.event.occurrence_us;
      queue_.pop();
      server_free_ = done.end_us;
      executed.push_back(done);
      log_.push_back(done);
    }
    clock_.advance_to(server_free_);
    return executed;
  }

  Micros now() const { return clock_.now(); }
  std::size_t pending() const { return queue_.size(); }
  const std::vector<ScheduledEvent>& log() const { return log_; }

 private:
  struct QueueItem {
    Micros occurrence_us;
    std::uint64_t seq;
    Event event;

    // priority_queue keeps the largest on top; invert for earliest-first.
    bool operator<(const QueueItem& other) const {
      if (occurrence_us != other.occurrence_us) {
        return occurrence_us > other.occurrence_us;
      }
      return seq > other.seq;
    }
  };

  Clock clock_;
  std::priority_queue<QueueItem> queue_;
  std::vector<ScheduledEvent> log_;
  Micros server_free_ = 0;
  EventId next_id_ = 1;
  std::uint64_t insert_seq_ = 0;
};

/// Events at occurrence times 0, interval, 2*interval, ..., (count-1)*interval,
/// all with the same duration and payload.
inline std::vector<Event> periodic(Micros interval_us, std::size_t count,
                                   Action payload = {},
                                   Micros duration_us = 0) {
  if (interval_us <= 0) {
    throw InvalidInterval("interval must be positive, got " +
                          std::to_string(interval_us));
  }
  std::vector<Event> events;
  events.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    events.push_back(Event{0, static_cast<Micros>(i) * interval_us,
                           duration_us, payload});
  }
  return events;
}

/// CSV export: `event_id,occurrence_us,start_us,end_us,jitter_us,payload_kind`.
inline void write_event_log_csv(std::span<const ScheduledEvent> log,
                                std::ostream& out) {
  out << "event_id,occurrence_us,start_us,end_us,jitter_us,payload_kind\n";
  for (const ScheduledEvent& e : log) {
    out << e.event.id << ',' << e.event.occurrence_us << ',' << e.start_us
        << ',' << e.end_us << ',' << e.jitter_us << ','
        << to_string(e.event.payload.kind) << '\n';
  }
}

}  // namespace loopbench
