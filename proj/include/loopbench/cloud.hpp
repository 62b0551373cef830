/*
 * Copyright (c) 2026, the loopbench contributors.
 * All rights reserved.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "loopbench/types.hpp"

namespace loopbench {

enum class ServiceKind { sensor, actuator };

inline const char* to_string(ServiceKind kind) {
  return kind == ServiceKind::sensor ? "sensor" : "actuator";
}

inline std::optional<ServiceKind> parse_service_kind(const std::string& text) {
  if (text == "sensor") return ServiceKind::sensor;
  if (text == "actuator") return ServiceKind::actuator;
  return std::nullopt;
}

/// A sensor consumes an actuator and vice versa.
inline ServiceKind complement(ServiceKind kind) {
  return kind == ServiceKind::sensor ? ServiceKind::actuator
                                     : ServiceKind::sensor;
}

struct ServiceDescriptor {
  std::string service_name;
  ServiceKind kind = ServiceKind::sensor;
  std::string endpoint;
  Micros registered_at_us = 0;

  friend bool operator==(const ServiceDescriptor&,
                         const ServiceDescriptor&) = default;
};

struct AuthorizationRule {
  std::string consumer;
  std::string provider;
  bool allowed = false;
};

struct OrchestrationRequest {
  std::string source;
  Temperature payload;
  std::uint64_t request_id = 0;
};

struct OrchestrationResponse {
  ServiceDescriptor target;
  std::uint64_t request_id = 0;
};

enum class AuthDecision { allowed, denied };

enum class RegisterStatus { ok, already_registered };

struct RegisterResult {
  RegisterStatus status = RegisterStatus::ok;
  std::uint64_t registration_id = 0;

  bool ok() const { return status == RegisterStatus::ok; }
};

enum class OrchestrateStatus { ok, not_found, unauthorized, unknown_source };

inline const char* to_string(OrchestrateStatus status) {
  switch (status) {
    case OrchestrateStatus::ok:
      return "ok";
    case OrchestrateStatus::not_found:
      return "NotFound";
    case OrchestrateStatus::unauthorized:
      return "Unauthorized";
    case OrchestrateStatus::unknown_source:
      return "UnknownSource";
  }
  return "unknown";
}

struct OrchestrateResult {
  OrchestrateStatus status = OrchestrateStatus::ok;
  std::optional<OrchestrationResponse> response;

  bool ok() const { return status == OrchestrateStatus::ok; }
};

/// Instrumentation counters, one increment per performed operation. The
/// benchmark uses them to assert that every orchestration performs exactly
/// one registry lookup and one authorization check.
struct CloudCounters {
  std::uint64_t registrations = 0;
  std::uint64_t lookups = 0;
  std::uint64_t auth_checks = 0;
  std::uint64_t orchestrate_requests = 0;
  std::uint64_t forwards = 0;
};

/// The local cloud: Service Registry, Authorization System and Orchestration
/// System in one process, metered as a single framework component.
///
/// Results are never cached; every orchestration performs the full registry
/// lookup plus authorization round, so the per-message framework cost is
/// visible to the power meter.
///
/// Not internally synchronized: in simulated mode all calls happen on the
/// scheduler's logical thread. The HTTP front end adds its own lock.
class LocalCloud {
 public:
  using DeliverFn = std::function<void(const std::string& target_name,
                                       Temperature value)>;

  RegisterResult register_service(ServiceDescriptor desc) {
    for (const ServiceDescriptor& existing : registry_) {
      if (existing.service_name == desc.service_name) {
        return RegisterResult{RegisterStatus::already_registered, 0};
      }
    }
    counters_.registrations++;
    registry_.push_back(std::move(desc));
    return RegisterResult{RegisterStatus::ok, next_registration_id_++};
  }

  /// Earliest-registered descriptor of the requested kind.
  std::optional<ServiceDescriptor> lookup(ServiceKind kind) {
    counters_.lookups++;
    for (const ServiceDescriptor& desc : registry_) {
      if (desc.kind == kind) {
        return desc;
      }
    }
    return std::nullopt;
  }

  /// Inserts or replaces the rule for (consumer, provider).
  void put_rule(const AuthorizationRule& rule) {
    rules_[{rule.consumer, rule.provider}] = rule.allowed;
  }

  /// Default-deny: allowed only when an explicit allow rule exists.
  AuthDecision check_authorization(const std::string& consumer,
                                   const std::string& provider) {
    counters_.auth_checks++;
    auto it = rules_.find({consumer, provider});
    if (it != rules_.end() && it->second) {
      return AuthDecision::allowed;
    }
    return AuthDecision::denied;
  }

  /// Full orchestration round: resolve the source, look up a matching
  /// provider, check authorization, then forward the payload to the target's
  /// bound sink. On any failure the payload is never delivered.
  OrchestrateResult orchestrate(const OrchestrationRequest& req) {
    counters_.orchestrate_requests++;
    const ServiceDescriptor* source = find(req.source);
    if (source == nullptr) {
      return OrchestrateResult{OrchestrateStatus::unknown_source, {}};
    }
    std::optional<ServiceDescriptor> target = lookup(complement(source->kind));
    if (!target) {
      return OrchestrateResult{OrchestrateStatus::not_found, {}};
    }
    if (check_authorization(source->service_name, target->service_name) !=
        AuthDecision::allowed) {
      return OrchestrateResult{OrchestrateStatus::unauthorized, {}};
    }
    auto sink = sinks_.find(target->service_name);
    if (sink != sinks_.end()) {
      sink->second(target->service_name, req.payload);
    }
    counters_.forwards++;
    return OrchestrateResult{OrchestrateStatus::ok,
                             OrchestrationResponse{*target, req.request_id}};
  }

  /// Binds the delivery function a forwarded value is handed to in
  /// simulated mode (the HTTP front end binds an HTTP POST instead).
  void bind_sink(const std::string& service_name, DeliverFn fn) {
    sinks_[service_name] = std::move(fn);
  }

  const CloudCounters& counters() const { return counters_; }
  std::size_t registry_size() const { return registry_.size(); }

 private:
  const ServiceDescriptor* find(const std::string& name) const {
    for (const ServiceDescriptor& desc : registry_) {
      if (desc.service_name == name) {
        return &desc;
      }
    }
    return nullptr;
  }

  std::vector<ServiceDescriptor> registry_;  // insertion order, for tie-breaks
  std::map<std::pair<std::string, std::string>, bool> rules_;
  std::map<std::string, DeliverFn> sinks_;
  CloudCounters counters_;
  std::uint64_t next_registration_id_ = 1;
};

}  // namespace loopbench
