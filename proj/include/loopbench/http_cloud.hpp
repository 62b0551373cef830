/*
 * Copyright (c) 2026, the loopbench contributors.
 * All rights reserved.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "loopbench/cloud.hpp"
#include "loopbench/devices.hpp"
#include "loopbench/format.hpp"
#include "loopbench/types.hpp"

namespace loopbench {

using nlohmann::json;

inline std::int64_t wall_epoch_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

/// JSON wire encoding. Timestamps travel as ISO-8601 UTC strings and are
/// microsecond integers internally.
inline json descriptor_to_json(const ServiceDescriptor& desc) {
  return json{{"service_name", desc.service_name},
              {"kind", to_string(desc.kind)},
              {"endpoint", desc.endpoint},
              {"registered_at", iso8601_utc_us(desc.registered_at_us)}};
}

inline ServiceDescriptor descriptor_from_json(const json& body) {
  ServiceDescriptor desc;
  desc.service_name = body.at("service_name").get<std::string>();
  auto kind = parse_service_kind(body.at("kind").get<std::string>());
  if (!kind) {
    throw ConfigError("unknown service kind");
  }
  desc.kind = *kind;
  desc.endpoint = body.at("endpoint").get<std::string>();
  if (desc.endpoint.empty()) {
    throw ConfigError("endpoint must be non-empty");
  }
  if (body.contains("registered_at")) {
    desc.registered_at_us =
        parse_iso8601_us(body.at("registered_at").get<std::string>());
  }
  return desc;
}

/// HTTP front end for the local cloud. One process hosts all three core
/// systems; shared registry and rule state sits behind a single lock so
/// concurrent requests observe linearizable reads and writes.
///
/// Routes:
///   POST /registry/register      -> 201 | 409
///   GET  /registry/lookup?kind=  -> 200 | 404
///   POST /authorization/rules    -> 201
///   POST /authorization/check    -> 200 {"allowed": bool}
///   POST /orchestration/request  -> 200 {"target": ...} | 403 | 404 | 502
///   GET  /health                 -> 200
class HttpFramework {
 public:
  HttpFramework() { setup_routes(); }

  ~HttpFramework() { stop(); }

  /// Binds to a free port and serves on a background thread. Returns the
  /// port.
  int start_any_port(const std::string& host = "127.0.0.1") {
    int port = server_.bind_to_any_port(host);
    if (port <= 0) {
      throw IoError("framework failed to bind on " + host);
    }
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port;
  }

  /// Serves on the calling thread until stop().
  bool listen(const std::string& host, int port) {
    return server_.listen(host, port);
  }

  void stop() {
    if (server_.is_running()) {
      server_.stop();
    }
    if (thread_.joinable()) {
      thread_.join();
    }
  }

  CloudCounters counters() {
    std::scoped_lock lock(mutex_);
    return cloud_.counters();
  }

 private:
  void setup_routes() {
    server_.Post("/registry/register", [this](const httplib::Request& req,
                                              httplib::Response& res) {
      handle(res, [&] {
        ServiceDescriptor desc = descriptor_from_json(json::parse(req.body));
        desc.registered_at_us = wall_epoch_us();
        std::scoped_lock lock(mutex_);
        RegisterResult result = cloud_.register_service(desc);
        if (!result.ok()) {
          res.status = 409;
          res.set_content(json{{"error", "AlreadyRegistered"}}.dump(),
                          "application/json");
          return;
        }
        // Only endpoints the framework can dial get a network forward;
        // anything else (e.g. local:// placeholders) is counted but kept
        // inside the framework process.
        if (desc.kind == ServiceKind::actuator &&
            desc.endpoint.rfind("http", 0) == 0) {
          bind_forward(desc.service_name, desc.endpoint);
        }
        res.status = 201;
        res.set_content(json{{"registration_id", result.registration_id},
                             {"service", descriptor_to_json(desc)}}
                            .dump(),
                        "application/json");
      });
    });

    server_.Get("/registry/lookup", [this](const httplib::Request& req,
                                           httplib::Response& res) {
      handle(res, [&] {
        auto kind = parse_service_kind(req.get_param_value("kind"));
        if (!kind) {
          res.status = 400;
          res.set_content(json{{"error", "unknown kind"}}.dump(),
                          "application/json");
          return;
        }
        std::scoped_lock lock(mutex_);
        std::optional<ServiceDescriptor> desc = cloud_.lookup(*kind);
        if (!desc) {
          res.status = 404;
          res.set_content(json{{"error", "NotFound"}}.dump(),
                          "application/json");
          return;
        }
        res.set_content(descriptor_to_json(*desc).dump(), "application/json");
      });
    });

    server_.Post("/authorization/rules", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      handle(res, [&] {
        json body = json::parse(req.body);
        AuthorizationRule rule{body.at("consumer").get<std::string>(),
                               body.at("provider").get<std::string>(),
                               body.at("allowed").get<bool>()};
        std::scoped_lock lock(mutex_);
        cloud_.put_rule(rule);
        res.status = 201;
        res.set_content(json{{"status", "ok"}}.dump(), "application/json");
      });
    });

    server_.Post("/authorization/check", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      handle(res, [&] {
        json body = json::parse(req.body);
        std::scoped_lock lock(mutex_);
        AuthDecision decision = cloud_.check_authorization(
            body.at("consumer").get<std::string>(),
            body.at("provider").get<std::string>());
        res.set_content(
            json{{"allowed", decision == AuthDecision::allowed}}.dump(),
            "application/json");
      });
    });

    server_.Post("/orchestration/request", [this](const httplib::Request& req,
                                                  httplib::Response& res) {
      handle(res, [&] {
        json body = json::parse(req.body);
        OrchestrationRequest request{
            body.at("source").get<std::string>(),
            Temperature(body.at("value").get<double>()), next_request_id_++};
        std::scoped_lock lock(mutex_);
        OrchestrateResult result = cloud_.orchestrate(request);
        switch (result.status) {
          case OrchestrateStatus::ok:
            res.set_content(
                json{{"target", descriptor_to_json(result.response->target)},
                     {"request_id", result.response->request_id}}
                    .dump(),
                "application/json");
            return;
          case OrchestrateStatus::unauthorized:
            res.status = 403;
            break;
          case OrchestrateStatus::not_found:
          case OrchestrateStatus::unknown_source:
            res.status = 404;
            break;
        }
        res.set_content(json{{"error", to_string(result.status)}}.dump(),
                        "application/json");
      });
    });

    server_.Get("/health",
                [](const httplib::Request&, httplib::Response& res) {
                  res.set_content(json{{"status", "ok"}}.dump(),
                                  "application/json");
                });
  }

  /// Forwarded values reach the actuator at its registered endpoint.
  void bind_forward(const std::string& name, const std::string& endpoint) {
    cloud_.bind_sink(name, [endpoint](const std::string&, Temperature value) {
      httplib::Client client(endpoint);
      client.set_connection_timeout(2, 0);
      client.set_read_timeout(5, 0);
      auto res = client.Post("/actuator/value",
                             json{{"value", value.celsius()}}.dump(),
                             "application/json");
      if (!res || res->status != 200) {
        throw IoError("forward to " + endpoint + " failed");
      }
    });
  }

  template <typename Fn>
  static void handle(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const IoError& error) {
      res.status = 502;
      res.set_content(json{{"error", error.what()}}.dump(),
                      "application/json");
    } catch (const std::exception& error) {
      res.status = 400;
      res.set_content(json{{"error", error.what()}}.dump(),
                      "application/json");
    }
  }

  httplib::Server server_;
  std::thread thread_;
  std::mutex mutex_;
  LocalCloud cloud_;
  std::uint64_t next_request_id_ = 1;
};

/// Standalone actuator node. Decides per received value whether to activate
/// and keeps the activation log queryable.
///
/// Routes:
///   POST /actuator/value -> 200 {"activated": bool, "active": bool}
///   GET  /actuator/state -> counters and activation log
///   GET  /health         -> 200
class HttpActuator {
 public:
  explicit HttpActuator(Limit limit = Limit{}) {
    state_.limit = limit;
    setup_routes();
  }

  ~HttpActuator() { stop(); }

  int start_any_port(const std::string& host = "127.0.0.1") {
    int port = server_.bind_to_any_port(host);
    if (port <= 0) {
      throw IoError("actuator failed to bind on " + host);
    }
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port;
  }

  bool listen(const std::string& host, int port) {
    return server_.listen(host, port);
  }

  void stop() {
    if (server_.is_running()) {
      server_.stop();
    }
    if (thread_.joinable()) {
      thread_.join();
    }
  }

  ActuatorState snapshot() {
    std::scoped_lock lock(mutex_);
    return state_;
  }

 private:
  void setup_routes() {
    server_.Post("/actuator/value", [this](const httplib::Request& req,
                                           httplib::Response& res) {
      try {
        json body = json::parse(req.body);
        Temperature value(body.at("value").get<double>());
        std::scoped_lock lock(mutex_);
        Micros t = std::max(clock_.now(), last_receipt_us_ + 1);
        last_receipt_us_ = t;
        ActuatorDecision decision = actuator_receive(state_, value, t);
        res.set_content(
            json{{"activated", decision == ActuatorDecision::activate},
                 {"active", state_.active}}
                .dump(),
            "application/json");
      } catch (const std::exception& error) {
        res.status = 400;
        res.set_content(json{{"error", error.what()}}.dump(),
                        "application/json");
      }
    });

    server_.Get("/actuator/state", [this](const httplib::Request&,
                                          httplib::Response& res) {
      std::scoped_lock lock(mutex_);
      json log = json::array();
      for (const ActivationRecord& record : state_.activation_log) {
        log.push_back(json{{"timestamp_us", record.timestamp_us},
                           {"value", record.value.celsius()}});
      }
      res.set_content(json{{"received", state_.received_count},
                           {"activations", state_.activation_log.size()},
                           {"active", state_.active},
                           {"limit", state_.limit.threshold.celsius()},
                           {"activation_log", log}}
                          .dump(),
                      "application/json");
    });

    server_.Get("/health",
                [](const httplib::Request&, httplib::Response& res) {
                  res.set_content(json{{"status", "ok"}}.dump(),
                                  "application/json");
                });
  }

  httplib::Server server_;
  std::thread thread_;
  std::mutex mutex_;
  ActuatorState state_;
  Clock clock_{ClockMode::wall_clock};
  Micros last_receipt_us_ = 0;
};

}  // namespace loopbench
