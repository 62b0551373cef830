/*
 * Copyright (c) 2026, the loopbench contributors.
 * All rights reserved.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <catch2/catch_amalgamated.hpp>

#include <string>

#include <loopbench/http_cloud.hpp>
#include <loopbench/live.hpp>

using namespace loopbench;

namespace {

std::string url_of(int port) {
  return "http://127.0.0.1:" + std::to_string(port);
}

json post_json(httplib::Client& client, const std::string& path,
               const json& body, int expected_status) {
  auto res = client.Post(path, body.dump(), "application/json");
  REQUIRE(res);
  INFO(path << " -> " << res->status << " " << res->body);
  REQUIRE(res->status == expected_status);
  return res->body.empty() ? json{} : json::parse(res->body);
}

}  // namespace

TEST_CASE("descriptor JSON round-trips with ISO-8601 timestamps") {
  ServiceDescriptor desc{"temp-1", ServiceKind::sensor, "http://x:1",
                         1'755'388'800'123'456};
  json encoded = descriptor_to_json(desc);
  CHECK(encoded.at("registered_at").get<std::string>().back() == 'Z');
  ServiceDescriptor decoded = descriptor_from_json(encoded);
  CHECK(decoded.service_name == desc.service_name);
  CHECK(decoded.kind == desc.kind);
  CHECK(decoded.endpoint == desc.endpoint);
  CHECK(decoded.registered_at_us == desc.registered_at_us);
}

TEST_CASE("descriptor JSON rejects bad kinds and empty endpoints") {
  json bad_kind{{"service_name", "x"}, {"kind", "framework"},
                {"endpoint", "http://x"}};
  CHECK_THROWS_AS(descriptor_from_json(bad_kind), ConfigError);
  json no_endpoint{{"service_name", "x"}, {"kind", "sensor"},
                   {"endpoint", ""}};
  CHECK_THROWS_AS(descriptor_from_json(no_endpoint), ConfigError);
}

TEST_CASE("registry endpoints register, conflict, and look up") {
  HttpFramework framework;
  int port = framework.start_any_port();
  httplib::Client client(url_of(port));

  json registered = post_json(
      client, "/registry/register",
      json{{"service_name", "temp-1"}, {"kind", "sensor"},
           {"endpoint", "local://temp-1"}},
      201);
  CHECK(registered.at("registration_id").get<std::uint64_t>() >= 1);

  json conflict = post_json(
      client, "/registry/register",
      json{{"service_name", "temp-1"}, {"kind", "sensor"},
           {"endpoint", "local://temp-1"}},
      409);
  CHECK(conflict.at("error") == "AlreadyRegistered");

  auto found = client.Get("/registry/lookup?kind=sensor");
  REQUIRE(found);
  REQUIRE(found->status == 200);
  json descriptor = json::parse(found->body);
  CHECK(descriptor.at("service_name") == "temp-1");
  CHECK(descriptor.at("registered_at").get<std::string>().back() == 'Z');

  auto missing = client.Get("/registry/lookup?kind=actuator");
  REQUIRE(missing);
  CHECK(missing->status == 404);

  auto invalid = client.Get("/registry/lookup?kind=toaster");
  REQUIRE(invalid);
  CHECK(invalid->status == 400);

  framework.stop();
}

TEST_CASE("authorization endpoints default-deny until a rule is installed") {
  HttpFramework framework;
  int port = framework.start_any_port();
  httplib::Client client(url_of(port));

  json denied = post_json(client, "/authorization/check",
                          json{{"consumer", "a"}, {"provider", "b"}}, 200);
  CHECK(denied.at("allowed") == false);

  post_json(client, "/authorization/rules",
            json{{"consumer", "a"}, {"provider", "b"}, {"allowed", true}},
            201);
  json allowed = post_json(client, "/authorization/check",
                           json{{"consumer", "a"}, {"provider", "b"}}, 200);
  CHECK(allowed.at("allowed") == true);

  framework.stop();
}

TEST_CASE("malformed request bodies come back as 400") {
  HttpFramework framework;
  int port = framework.start_any_port();
  httplib::Client client(url_of(port));
  auto res = client.Post("/registry/register", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  framework.stop();
}

TEST_CASE("orchestration over HTTP forwards the value to a live actuator") {
  HttpFramework framework;
  int framework_port = framework.start_any_port();
  HttpActuator actuator;
  int actuator_port = actuator.start_any_port();
  httplib::Client client(url_of(framework_port));

  post_json(client, "/registry/register",
            json{{"service_name", "temp-sensor"}, {"kind", "sensor"},
                 {"endpoint", "local://temp-sensor"}},
            201);
  post_json(client, "/registry/register",
            json{{"service_name", "air-condition"}, {"kind", "actuator"},
                 {"endpoint", url_of(actuator_port)}},
            201);

  // No rule yet: 403, and the actuator must not have been touched.
  post_json(client, "/orchestration/request",
            json{{"source", "temp-sensor"}, {"value", 30.0}}, 403);
  CHECK(actuator.snapshot().received_count == 0);

  post_json(client, "/authorization/rules",
            json{{"consumer", "temp-sensor"}, {"provider", "air-condition"},
                 {"allowed", true}},
            201);
  json response = post_json(client, "/orchestration/request",
                            json{{"source", "temp-sensor"}, {"value", 30.0}},
                            200);
  CHECK(response.at("target").at("service_name") == "air-condition");

  ActuatorState state = actuator.snapshot();
  CHECK(state.received_count == 1);
  REQUIRE(state.activation_log.size() == 1);
  CHECK(state.activation_log[0].value.celsius() == 30.0);
  CHECK(state.active);

  // A below-limit value is delivered but does not activate.
  post_json(client, "/orchestration/request",
            json{{"source", "temp-sensor"}, {"value", 20.0}}, 200);
  state = actuator.snapshot();
  CHECK(state.received_count == 2);
  CHECK(state.activation_log.size() == 1);
  CHECK_FALSE(state.active);

  CloudCounters counters = framework.counters();
  CHECK(counters.orchestrate_requests == 3);
  CHECK(counters.forwards == 2);

  actuator.stop();
  framework.stop();
}

TEST_CASE("orchestration without a registered actuator is 404") {
  HttpFramework framework;
  int port = framework.start_any_port();
  httplib::Client client(url_of(port));
  post_json(client, "/registry/register",
            json{{"service_name", "temp-sensor"}, {"kind", "sensor"},
                 {"endpoint", "local://temp-sensor"}},
            201);
  post_json(client, "/orchestration/request",
            json{{"source", "temp-sensor"}, {"value", 30.0}}, 404);
  post_json(client, "/orchestration/request",
            json{{"source", "ghost"}, {"value", 30.0}}, 404);
  framework.stop();
}

TEST_CASE("an unreachable actuator endpoint surfaces as 502") {
  HttpFramework framework;
  int port = framework.start_any_port();
  httplib::Client client(url_of(port));
  post_json(client, "/registry/register",
            json{{"service_name", "temp-sensor"}, {"kind", "sensor"},
                 {"endpoint", "local://temp-sensor"}},
            201);
  post_json(client, "/registry/register",
            json{{"service_name", "air-condition"}, {"kind", "actuator"},
                 {"endpoint", "http://127.0.0.1:1"}},
            201);
  post_json(client, "/authorization/rules",
            json{{"consumer", "temp-sensor"}, {"provider", "air-condition"},
                 {"allowed", true}},
            201);
  post_json(client, "/orchestration/request",
            json{{"source", "temp-sensor"}, {"value", 30.0}}, 502);
  framework.stop();
}

TEST_CASE("actuator node health and state endpoints work standalone") {
  HttpActuator actuator;
  int port = actuator.start_any_port();
  httplib::Client client(url_of(port));

  auto health = client.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);

  post_json(client, "/actuator/value", json{{"value", 26.5}}, 200);
  auto state = client.Get("/actuator/state");
  REQUIRE(state);
  REQUIRE(state->status == 200);
  json body = json::parse(state->body);
  CHECK(body.at("received") == 1);
  CHECK(body.at("activations") == 1);
  CHECK(body.at("active") == true);
  CHECK(body.at("limit") == 25.0);

  auto bad = client.Post("/actuator/value", "{\"value\": 9000}",
                         "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);

  actuator.stop();
}

TEST_CASE("the typed client wraps every framework route") {
  HttpFramework framework;
  int port = framework.start_any_port();
  HttpCloudClient client(url_of(port));

  CHECK(client.healthy());
  CHECK(client
            .register_service(ServiceDescriptor{
                "temp-sensor", ServiceKind::sensor, "local://temp-sensor", 0})
            .ok());
  RegisterResult again = client.register_service(ServiceDescriptor{
      "temp-sensor", ServiceKind::sensor, "local://temp-sensor", 0});
  CHECK(again.status == RegisterStatus::already_registered);

  CHECK_FALSE(client.lookup(ServiceKind::actuator));
  CHECK(client
            .register_service(ServiceDescriptor{"air-condition",
                                                ServiceKind::actuator,
                                                "local://air-condition", 0})
            .ok());
  auto found = client.lookup(ServiceKind::actuator);
  REQUIRE(found);
  CHECK(found->service_name == "air-condition");

  CHECK(client.check_authorization("temp-sensor", "air-condition") ==
        AuthDecision::denied);
  client.put_rule(AuthorizationRule{"temp-sensor", "air-condition", true});
  CHECK(client.check_authorization("temp-sensor", "air-condition") ==
        AuthDecision::allowed);

  OrchestrationResponse response =
      client.orchestrate("temp-sensor", Temperature(30.0));
  CHECK(response.target.service_name == "air-condition");

  framework.stop();
}

TEST_CASE("client calls against a dead endpoint abort the run") {
  HttpCloudClient client("http://127.0.0.1:1");
  CHECK_FALSE(client.healthy());
  CHECK_THROWS_AS(client.lookup(ServiceKind::sensor), RunAborted);
  CHECK_THROWS_AS(client.orchestrate("temp-sensor", Temperature(30.0)),
                  RunAborted);
}

TEST_CASE("run_loop_live drives a full loop against live services") {
  HttpFramework framework;
  int framework_port = framework.start_any_port();
  HttpActuator actuator;
  int actuator_port = actuator.start_any_port();

  LiveOptions options;
  options.framework_url = url_of(framework_port);
  options.actuator_url = url_of(actuator_port);
  options.time_scale = 0.0;  // no pacing in unit tests

  HttpCloudClient client(options.framework_url);
  on_board(client, options);

  ValueTrace trace = generate_trace(10, Limit{}, 42);
  Strategy strategy = Strategy::event_driven(trace.limit);
  DeviceRunLog log = run_loop_live(strategy, trace, client, options);

  CHECK(log.orchestrate_count == 5);
  CHECK(log.activation_count == 5);
  CHECK(log.steps.size() == 10);
  CHECK(log.duration_us == 10 * 1'030'000 + 5 * 220'000);
  ActuatorSnapshot snapshot = fetch_actuator_snapshot(options.actuator_url);
  CHECK(snapshot.received == 5);
  CHECK(snapshot.activations == 5);

  actuator.stop();
  framework.stop();
}

TEST_CASE("run_experiment_live preserves partial results on failure") {
  ExperimentConfig config;
  config.runs = 2;
  config.measurements_per_run = 4;
  config.mode = RunMode::live;

  LiveOptions dead;
  dead.framework_url = "http://127.0.0.1:1";
  dead.time_scale = 0.0;
  LiveExperimentResult result = run_experiment_live(config, dead);
  CHECK(result.aborted);
  CHECK(result.artifacts.empty());
  CHECK_FALSE(result.abort_reason.empty());
}

TEST_CASE("run_experiment_live completes a small protocol end to end") {
  HttpFramework framework;
  int framework_port = framework.start_any_port();
  HttpActuator actuator;
  int actuator_port = actuator.start_any_port();

  ExperimentConfig config;
  config.runs = 2;
  config.measurements_per_run = 4;
  config.mode = RunMode::live;

  LiveOptions options;
  options.framework_url = url_of(framework_port);
  options.actuator_url = url_of(actuator_port);
  options.time_scale = 0.0;

  LiveExperimentResult result = run_experiment_live(config, options);
  INFO(result.abort_reason);
  REQUIRE_FALSE(result.aborted);
  REQUIRE(result.artifacts.size() == 4);
  ComparisonSummary summary = summarize(reports_of(result.artifacts));
  CHECK(summary.time_driven.included_runs == 1);
  CHECK(summary.event_driven.included_runs == 1);
  CHECK(summary.percent_difference > 0.0);

  actuator.stop();
  framework.stop();
}
