/*
 * Copyright (c) 2026, the loopbench contributors.
 * All rights reserved.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "loopbench/bench.hpp"
#include "loopbench/cloud.hpp"
#include "loopbench/devices.hpp"
#include "loopbench/http_cloud.hpp"
#include "loopbench/scheduler.hpp"
#include "loopbench/trace.hpp"
#include "loopbench/types.hpp"

namespace loopbench {

inline std::string default_framework_url() {
  const char* env = std::getenv("LOOPBENCH_FRAMEWORK_URL");
  if (env != nullptr && *env != '\0') {
    return env;
  }
  return "http://127.0.0.1:8420";
}

struct LiveOptions {
  std::string framework_url = default_framework_url();
  /// The actuator's own HTTP address. Registered with the framework during
  /// on-boarding and polled after each run for an end-to-end consistency
  /// check. Empty skips both.
  std::string actuator_url;
  std::string sensor_name = "temp-sensor";
  std::string actuator_name = "air-condition";
  /// Wall seconds per modeled second. 1.0 replays the loop in real time;
  /// smaller values compress it. 0 disables pacing entirely.
  double time_scale = 1.0;
};

/// Client side of the framework HTTP API. Transport failures surface as
/// RunAborted so a live run degrades the same way regardless of which call
/// lost connectivity.
class HttpCloudClient {
 public:
  explicit HttpCloudClient(std::string base_url)
      : base_url_(std::move(base_url)), client_(base_url_) {
    client_.set_connection_timeout(2, 0);
    client_.set_read_timeout(10, 0);
  }

  RegisterResult register_service(const ServiceDescriptor& desc) {
    auto res =
        client_.Post("/registry/register", descriptor_to_json(desc).dump(),
                     "application/json");
    require(res, "POST /registry/register");
    if (res->status == 409) {
      return RegisterResult{RegisterStatus::already_registered, 0};
    }
    if (res->status != 201) {
      throw RunAborted(unexpected("POST /registry/register", res->status));
    }
    json body = json::parse(res->body);
    return RegisterResult{RegisterStatus::ok,
                          body.at("registration_id").get<std::uint64_t>()};
  }

  void put_rule(const AuthorizationRule& rule) {
    auto res = client_.Post("/authorization/rules",
                            json{{"consumer", rule.consumer},
                                 {"provider", rule.provider},
                                 {"allowed", rule.allowed}}
                                .dump(),
                            "application/json");
    require(res, "POST /authorization/rules");
    if (res->status != 201) {
      throw RunAborted(unexpected("POST /authorization/rules", res->status));
    }
  }

  std::optional<ServiceDescriptor> lookup(ServiceKind kind) {
    auto res = client_.Get(std::string("/registry/lookup?kind=") +
                           to_string(kind));
    require(res, "GET /registry/lookup");
    if (res->status == 404) {
      return std::nullopt;
    }
    if (res->status != 200) {
      throw RunAborted(unexpected("GET /registry/lookup", res->status));
    }
    return descriptor_from_json(json::parse(res->body));
  }

  AuthDecision check_authorization(const std::string& consumer,
                                   const std::string& provider) {
    auto res = client_.Post(
        "/authorization/check",
        json{{"consumer", consumer}, {"provider", provider}}.dump(),
        "application/json");
    require(res, "POST /authorization/check");
    if (res->status != 200) {
      throw RunAborted(unexpected("POST /authorization/check", res->status));
    }
    return json::parse(res->body).at("allowed").get<bool>()
               ? AuthDecision::allowed
               : AuthDecision::denied;
  }

  /// Issues one orchestration request; the framework forwards the value to
  /// the actuator before replying. Any non-200 outcome aborts the run.
  OrchestrationResponse orchestrate(const std::string& source,
                                    Temperature value) {
    auto res = client_.Post(
        "/orchestration/request",
        json{{"source", source}, {"value", value.celsius()}}.dump(),
        "application/json");
    require(res, "POST /orchestration/request");
    if (res->status != 200) {
      throw RunAborted(unexpected("POST /orchestration/request", res->status));
    }
    json body = json::parse(res->body);
    return OrchestrationResponse{
        descriptor_from_json(body.at("target")),
        body.at("request_id").get<std::uint64_t>()};
  }

  bool healthy() {
    auto res = client_.Get("/health");
    return res && res->status == 200;
  }

 private:
  void require(const httplib::Result& res, const std::string& what) {
    if (!res) {
      throw RunAborted(what + " to " + base_url_ + " failed: " +
                       httplib::to_string(res.error()));
    }
  }

  std::string unexpected(const std::string& what, int status) {
    return what + " returned HTTP " + std::to_string(status);
  }

  std::string base_url_;
  httplib::Client client_;
};

/// Registers both devices and installs the allow rule. Re-registration of an
/// already on-boarded device is tolerated, so repeated runs against a
/// long-lived framework work.
inline void on_board(HttpCloudClient& client, const LiveOptions& options) {
  client.register_service(ServiceDescriptor{options.sensor_name,
                                            ServiceKind::sensor,
                                            "local://" + options.sensor_name,
                                            0});
  std::string actuator_endpoint = options.actuator_url.empty()
                                      ? "local://" + options.actuator_name
                                      : options.actuator_url;
  client.register_service(ServiceDescriptor{
      options.actuator_name, ServiceKind::actuator, actuator_endpoint, 0});
  client.put_rule(
      AuthorizationRule{options.sensor_name, options.actuator_name, true});
}

struct ActuatorSnapshot {
  std::uint64_t received = 0;
  std::uint64_t activations = 0;
  bool active = false;
};

inline ActuatorSnapshot fetch_actuator_snapshot(const std::string& url) {
  httplib::Client client(url);
  client.set_connection_timeout(2, 0);
  client.set_read_timeout(5, 0);
  auto res = client.Get("/actuator/state");
  if (!res || res->status != 200) {
    throw RunAborted("GET /actuator/state on " + url + " failed");
  }
  json body = json::parse(res->body);
  return ActuatorSnapshot{body.at("received").get<std::uint64_t>(),
                          body.at("activations").get<std::uint64_t>(),
                          body.at("active").get<bool>()};
}

/// One live control-loop run. The schedule and the energy accounting use the
/// same modeled timeline as a simulated run; wall time only paces the HTTP
/// traffic, scaled by time_scale. Every sent step issues a real orchestration
/// request against the framework.
inline DeviceRunLog run_loop_live(const Strategy& strategy,
                                  const ValueTrace& trace,
                                  HttpCloudClient& client,
                                  const LiveOptions& options) {
  Strategy::validate(strategy);
  DeviceRunLog log;
  log.strategy = strategy.kind;
  log.sensor = SensorState{trace, 0, strategy, 0, 0};
  log.actuator = ActuatorState{false, {}, trace.limit, 0};

  Scheduler scheduler;
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

  std::optional<ActuatorSnapshot> before;
  if (!options.actuator_url.empty()) {
    before = fetch_actuator_snapshot(options.actuator_url);
  }

  const auto wall_start = std::chrono::steady_clock::now();
  log.steps.reserve(log.events.size());
  for (const ScheduledEvent& event : log.events) {
    const StepActions& actions = planned[static_cast<std::size_t>(
        event.event.payload.step)];
    DeviceStepRecord record;
    record.step = event.event.payload.step;
    record.value = actions.value;
    record.sent = actions.sent;
    record.occurrence_us = event.event.occurrence_us;
    record.start_us = event.start_us;
    record.end_us = event.end_us;

    if (actions.sent) {
      client.orchestrate(options.sensor_name, actions.value);
      log.orchestrate_count++;
      // The actuator applies the same limit rule; mirror its decision so the
      // local log is complete, then reconcile against its counters below.
      ActuatorDecision decision =
          actuator_receive(log.actuator, actions.value, event.end_us);
      record.activated = decision == ActuatorDecision::activate;
      if (record.activated) {
        log.activation_count++;
      }
    }
    log.steps.push_back(record);

    if (options.time_scale > 0.0) {
      auto deadline =
          wall_start + std::chrono::microseconds(static_cast<std::int64_t>(
                           static_cast<double>(event.end_us) *
                           options.time_scale));
      std::this_thread::sleep_until(deadline);
    }
  }

  if (before) {
    ActuatorSnapshot after = fetch_actuator_snapshot(options.actuator_url);
    if (after.received - before->received != log.orchestrate_count ||
        after.activations - before->activations != log.activation_count) {
      throw RunAborted("actuator state diverged from the local log: sent " +
                       std::to_string(log.orchestrate_count) + "/" +
                       std::to_string(log.activation_count) +
                       ", actuator saw " +
                       std::to_string(after.received - before->received) +
                       "/" +
                       std::to_string(after.activations - before->activations));
    }
  }
  return log;
}

/// Outcome of a live experiment. On connectivity failure `aborted` is set
/// and `artifacts` holds every run completed before the failure.
struct LiveExperimentResult {
  std::vector<RunArtifacts> artifacts;
  bool aborted = false;
  std::string abort_reason;
};

/// Live counterpart of run_experiment: same protocol, same seeded trace,
/// but the control loop talks to a real framework over HTTP.
inline LiveExperimentResult run_experiment_live(const ExperimentConfig& config,
                                                const LiveOptions& options) {
  config.validate();
  LiveExperimentResult result;
  try {
    HttpCloudClient client(options.framework_url);
    LiveOptions effective = options;
    on_board(client, effective);

    const ValueTrace trace = generate_trace(
        static_cast<std::size_t>(config.measurements_per_run), config.limit,
        config.seed);

    std::vector<std::pair<StrategyKind, int>> order;
    if (config.interleave) {
      for (int run = 0; run < config.runs; ++run) {
        for (StrategyKind kind : config.strategies) {
          order.push_back({kind, run});
        }
      }
    } else {
      for (StrategyKind kind : config.strategies) {
        for (int run = 0; run < config.runs; ++run) {
          order.push_back({kind, run});
        }
      }
    }

    for (const auto& [kind, run] : order) {
      RunArtifacts artifacts;
      artifacts.device =
          run_loop_live(config.make_strategy(kind), trace, client, effective);

      RunReport& report = artifacts.report;
      report.strategy = kind;
      report.run_index = run;
      report.energy = account_energy(artifacts.device.events, config.model,
                                     artifacts.device.duration_us, run);
      report.duration_us = artifacts.device.duration_us;
      report.orchestrate_count = artifacts.device.orchestrate_count;
      report.activation_count = artifacts.device.activation_count;
      report.excluded = run < config.warmup_runs;
      result.artifacts.push_back(std::move(artifacts));
    }
  } catch (const RunAborted& error) {
    result.aborted = true;
    result.abort_reason = error.what();
  }
  return result;
}

}  // namespace loopbench
