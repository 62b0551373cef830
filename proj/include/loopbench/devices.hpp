/*
 * Copyright (c) 2026, the loopbench contributors.
 * All rights reserved.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "loopbench/cloud.hpp"
#include "loopbench/format.hpp"
#include "loopbench/scheduler.hpp"
#include "loopbench/trace.hpp"
#include "loopbench/types.hpp"

namespace loopbench {

/// Per-step costs of a control-loop iteration: the local measure+check work
/// and the framework send round-trip. Defaults are the calibrated values
/// that make a 100-measurement run last 125 s when every step sends and
/// 114 s when only the above-limit half does.
struct StepTiming {
  Micros measure_us = 1'030'000;        // c
  Micros send_roundtrip_us = 220'000;   // s
};

enum class StrategyKind { time_driven, event_driven };

inline const char* to_string(StrategyKind kind) {
  return kind == StrategyKind::time_driven ? "time" : "event";
}

inline std::optional<StrategyKind> parse_strategy_kind(
    const std::string& text) {
  if (text == "time" || text == "time_driven") return StrategyKind::time_driven;
  if (text == "event" || text == "event_driven")
    return StrategyKind::event_driven;
  return std::nullopt;
}

/// A control-loop design approach. Both strategies sample every trace value;
/// they differ only in whether a value below the limit is sent through the
/// framework.
///
/// The time-driven period covers a full measure+send step, so its schedule
/// runs back to back with zero jitter. The event-driven sampling period
/// covers only the measure step; a step that also sends overruns the period
/// and delays every later sample (queue jitter).
struct Strategy {
  StrategyKind kind = StrategyKind::time_driven;
  Micros interval_us = 0;
  std::optional<Limit> limit;  // present iff event_driven
  StepTiming timing;

  static Strategy time_driven(StepTiming timing = {}) {
    Strategy s;
    s.kind = StrategyKind::time_driven;
    s.timing = timing;
    s.interval_us = timing.measure_us + timing.send_roundtrip_us;
    validate(s);
    return s;
  }

  static Strategy event_driven(Limit limit, StepTiming timing = {}) {
    Strategy s;
    s.kind = StrategyKind::event_driven;
    s.limit = limit;
    s.timing = timing;
    s.interval_us = timing.measure_us;
    validate(s);
    return s;
  }

  static void validate(const Strategy& s) {
    if (s.interval_us <= 0) {
      throw InvalidInterval("strategy interval must be positive");
    }
    if ((s.kind == StrategyKind::event_driven) != s.limit.has_value()) {
      throw ConfigError("limit must be present exactly for event_driven");
    }
  }
};

/// What one sensor step did. sent implies measured.
struct StepActions {
  bool measured = false;
  bool sent = false;
  Temperature value;
};

struct SensorState {
  ValueTrace trace;
  std::size_t cursor = 0;
  Strategy strategy;
  std::uint64_t send_count = 0;
  std::uint64_t measure_count = 0;
};

namespace detail {

inline Temperature sensor_read_next(SensorState& state) {
  if (state.cursor >= state.trace.size()) {
    throw TraceExhausted("sensor trace exhausted at step " +
                         std::to_string(state.cursor));
  }
  Temperature value = state.trace.values[state.cursor];
  state.cursor++;
  state.measure_count++;
  return value;
}

}  // namespace detail

/// Time-driven step: measure and always send, irrespective of the value.
inline StepActions sensor_step_time_driven(SensorState& state) {
  Temperature value = detail::sensor_read_next(state);
  state.send_count++;
  return StepActions{true, true, value};
}

/// Event-driven step: measure, send only when the value reaches or exceeds
/// the limit.
inline StepActions sensor_step_event_driven(SensorState& state) {
  Temperature value = detail::sensor_read_next(state);
  bool sent = should_trigger(value, *state.strategy.limit);
  if (sent) {
    state.send_count++;
  }
  return StepActions{true, sent, value};
}

inline StepActions sensor_step(SensorState& state) {
  return state.strategy.kind == StrategyKind::time_driven
             ? sensor_step_time_driven(state)
             : sensor_step_event_driven(state);
}

enum class ActuatorDecision { activate, noop };

struct ActivationRecord {
  Micros timestamp_us = 0;
  Temperature value;
};

/// The air-conditioning stand-in: decides per received value whether to act.
struct ActuatorState {
  bool active = false;
  std::vector<ActivationRecord> activation_log;
  Limit limit;
  std::uint64_t received_count = 0;
};

/// Activate iff the value reaches or exceeds the limit; activations are
/// appended to the log, which stays strictly increasing in timestamp.
inline ActuatorDecision actuator_receive(ActuatorState& state,
                                         Temperature value, Micros t) {
  state.received_count++;
  if (should_trigger(value, state.limit)) {
    if (!state.activation_log.empty() &&
        t <= state.activation_log.back().timestamp_us) {
      throw Error("activation timestamps must be strictly increasing");
    }
    state.activation_log.push_back(ActivationRecord{t, value});
    state.active = true;
    return ActuatorDecision::activate;
  }
  state.active = false;
  return ActuatorDecision::noop;
}

struct DeviceStepRecord {
  int step = 0;
  Temperature value;
  bool sent = false;
  bool activated = false;
  Micros occurrence_us = 0;
  Micros start_us = 0;
  Micros end_us = 0;
};

/// Complete record of one control-loop run.
struct DeviceRunLog {
  StrategyKind strategy = StrategyKind::time_driven;
  std::vector<DeviceStepRecord> steps;
  std::vector<ScheduledEvent> events;
  SensorState sensor;
  ActuatorState actuator;
  Micros duration_us = 0;
  std::uint64_t orchestrate_count = 0;
  std::uint64_t activation_count = 0;
};

struct RunLoopOptions {
  std::string sensor_name = "temp-sensor";
  std::string actuator_name = "air-condition";
};

/// Drives one full run: schedules one measurement event per trace value at
/// the strategy's interval, executes the queue, and routes every sent value
/// through the cloud's orchestration to the actuator.
///
/// Requires sensor and actuator registered and an allow rule in place;
/// aborts the run on any orchestration failure.
inline DeviceRunLog run_loop(const Strategy& strategy, const ValueTrace& trace,
                             Scheduler& scheduler, LocalCloud& cloud,
                             const RunLoopOptions& options = {}) {
  Strategy::validate(strategy);
  DeviceRunLog log;
  log.strategy = strategy.kind;
  log.sensor = SensorState{trace, 0, strategy, 0, 0};
  log.actuator = ActuatorState{false, {}, trace.limit, 0};

  // The trace is predefined, so every step's outcome (and with it each
  // event's duration) is known before the run starts.
  std::vector<StepActions> planned;
  planned.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    StepActions actions = sensor_step(log.sensor);
    Micros duration = strategy.timing.measure_us +
                      (actions.sent ? strategy.timing.send_roundtrip_us : 0);
    Action payload{actions.sent ? ActionKind::measure_send : ActionKind::measure,
                   static_cast<int>(i), TimeCriticality::soft};
    scheduler.schedule(static_cast<Micros>(i) * strategy.interval_us, duration,
                       payload);
    planned.push_back(actions);
  }

  log.events = scheduler.run_all();
  log.duration_us = log.events.empty() ? 0 : log.events.back().end_us;

  // Deliveries land on the actuator when the send round-trip completes.
  Micros delivery_time = 0;
  cloud.bind_sink(options.actuator_name,
                  [&log, &delivery_time](const std::string&, Temperature value) {
                    actuator_receive(log.actuator, value, delivery_time);
                  });

  std::uint64_t request_id = 1;
  for (const ScheduledEvent& event : log.events) {
    const int step = event.event.payload.step;
    const StepActions& actions = planned[static_cast<std::size_t>(step)];
    DeviceStepRecord record;
    record.step = step;
    record.value = actions.value;
    record.sent = actions.sent;
    record.occurrence_us = event.event.occurrence_us;
    record.start_us = event.start_us;
    record.end_us = event.end_us;
    if (actions.sent) {
      delivery_time = event.end_us;
      std::size_t before = log.actuator.activation_log.size();
      OrchestrateResult result = cloud.orchestrate(
          OrchestrationRequest{options.sensor_name, actions.value,
                               request_id++});
      if (!result.ok()) {
        throw RunAborted(std::string("orchestration failed: ") +
                         to_string(result.status));
      }
      log.orchestrate_count++;
      record.activated = log.actuator.activation_log.size() > before;
    }
    log.steps.push_back(record);
  }
  log.activation_count = log.actuator.activation_log.size();
  return log;
}

/// CSV export: `step,value,sent,activated,timestamp_us`.
inline void write_device_log_csv(const DeviceRunLog& log, std::ostream& out) {
  out << "step,value,sent,activated,timestamp_us\n";
  for (const DeviceStepRecord& r : log.steps) {
    out << r.step << ',' << format_double(r.value.celsius()) << ','
        << (r.sent ? 1 : 0) << ',' << (r.activated ? 1 : 0) << ','
        << r.start_us << '\n';
  }
}

}  // namespace loopbench
