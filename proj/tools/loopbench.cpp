/*
 * Copyright (c) 2026, the loopbench contributors.
 * All rights reserved.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

/// Command line front end.
///
/// Exit codes: 0 on success, 2 on configuration or usage errors, 3 when a
/// run aborts or required data is missing.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <loopbench/loopbench.hpp>

namespace fs = std::filesystem;

namespace {

struct RunOptions {
  std::string strategy = "both";
  int runs = 22;
  int measurements = 100;
  double limit = 25.0;
  std::uint64_t seed = 1;
  std::string mode = "sim";
  std::string power_model_path;
  std::string out_dir;
  int warmup = 1;
  bool interleave = false;
  bool export_events = false;
  bool export_device_logs = false;
  double sampling_interval_ms = 100.0;
  // Live mode only.
  std::string framework_url;
  std::string actuator_url;
  double time_scale = 1.0;
};

loopbench::ExperimentConfig build_config(const RunOptions& options) {
  loopbench::ExperimentConfig config;
  config.runs = static_cast<std::size_t>(options.runs);
  config.measurements_per_run = static_cast<std::size_t>(options.measurements);
  config.limit = loopbench::Limit{loopbench::Temperature(options.limit)};
  config.seed = options.seed;
  config.warmup_runs = static_cast<std::size_t>(options.warmup);
  config.mode = options.mode == "live" ? loopbench::RunMode::live
                                       : loopbench::RunMode::sim;
  config.interleave = options.interleave;
  config.export_events = options.export_events;
  config.export_device_logs = options.export_device_logs;
  config.sampling_interval_us = static_cast<loopbench::Micros>(
      std::llround(options.sampling_interval_ms * 1000.0));
  if (options.strategy == "time") {
    config.strategies = {loopbench::StrategyKind::time_driven};
  } else if (options.strategy == "event") {
    config.strategies = {loopbench::StrategyKind::event_driven};
  } else {
    config.strategies = {loopbench::StrategyKind::time_driven,
                         loopbench::StrategyKind::event_driven};
  }
  if (!options.power_model_path.empty()) {
    std::ifstream in(options.power_model_path);
    if (!in) {
      throw loopbench::ConfigError("cannot open power model file: " +
                                   options.power_model_path);
    }
    config.model = loopbench::load_power_model(in);
  }
  config.validate();
  return config;
}

int command_run(const RunOptions& options) {
  loopbench::ExperimentConfig config = build_config(options);

  std::vector<loopbench::RunArtifacts> artifacts;
  bool aborted = false;
  std::string abort_reason;
  if (config.mode == loopbench::RunMode::sim) {
    artifacts = loopbench::run_experiment(config);
  } else {
    loopbench::LiveOptions live;
    live.framework_url = options.framework_url.empty()
                             ? loopbench::default_framework_url()
                             : options.framework_url;
    live.actuator_url = options.actuator_url;
    live.time_scale = options.time_scale;
    loopbench::LiveExperimentResult result =
        loopbench::run_experiment_live(config, live);
    artifacts = std::move(result.artifacts);
    aborted = result.aborted;
    abort_reason = result.abort_reason;
  }

  loopbench::ComparisonSummary summary{};
  bool summarized = false;
  try {
    summary = loopbench::summarize(loopbench::reports_of(artifacts));
    summarized = true;
  } catch (const loopbench::InsufficientData&) {
    // An aborted live experiment can end with no usable runs; the partial
    // artifacts are still exported below.
  }

  if (!options.out_dir.empty()) {
    loopbench::export_results(artifacts, summary, config, options.out_dir);
    std::cout << "results written to " << options.out_dir << "\n";
  }
  if (summarized) {
    loopbench::write_summary_text(summary, std::cout);
  }
  if (aborted) {
    std::cerr << "run aborted: " << abort_reason << "\n";
    return 3;
  }
  if (!summarized) {
    std::cerr << "no completed runs to summarize\n";
    return 3;
  }
  return 0;
}

int command_summarize(const std::string& dir) {
  fs::path runs_csv = fs::path(dir) / "runs.csv";
  std::ifstream in(runs_csv);
  if (!in) {
    throw loopbench::IoError("cannot open " + runs_csv.string());
  }
  std::vector<loopbench::RunReport> reports = loopbench::parse_runs_csv(in);
  loopbench::ComparisonSummary summary = loopbench::summarize(reports);
  loopbench::write_summary_text(summary, std::cout);
  return 0;
}

int command_framework(const std::string& host, int port) {
  loopbench::HttpFramework framework;
  std::cout << "framework listening on http://" << host << ":" << port << "\n"
            << std::flush;
  if (!framework.listen(host, port)) {
    throw loopbench::IoError("cannot bind framework to " + host + ":" +
                             std::to_string(port));
  }
  return 0;
}

int command_actuator(const std::string& host, int port, double limit) {
  loopbench::HttpActuator actuator{
      loopbench::Limit{loopbench::Temperature(limit)}};
  std::cout << "actuator listening on http://" << host << ":" << port << "\n"
            << std::flush;
  if (!actuator.listen(host, port)) {
    throw loopbench::IoError("cannot bind actuator to " + host + ":" +
                             std::to_string(port));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loopbench: deterministic benchmark for time-driven vs "
               "event-driven control loops"};
  app.require_subcommand(1);

  RunOptions run_options;
  CLI::App* run_cmd =
      app.add_subcommand("run", "Execute a benchmark experiment");
  run_cmd->add_option("--strategy", run_options.strategy,
                      "Control loop strategy: time, event, or both")
      ->check(CLI::IsMember({"time", "event", "both"}))
      ->capture_default_str();
  run_cmd->add_option("--runs", run_options.runs, "Runs per strategy")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run_cmd
      ->add_option("--measurements", run_options.measurements,
                   "Measurements per run (must be even)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run_cmd
      ->add_option("--limit", run_options.limit,
                   "Actuation limit in degrees Celsius")
      ->capture_default_str();
  run_cmd->add_option("--seed", run_options.seed, "Trace generator seed")
      ->capture_default_str();
  run_cmd->add_option("--mode", run_options.mode, "Execution mode")
      ->check(CLI::IsMember({"sim", "live"}))
      ->capture_default_str();
  run_cmd->add_option("--power-model", run_options.power_model_path,
                      "Power model file (defaults to the calibrated model)");
  run_cmd->add_option("--out", run_options.out_dir,
                      "Directory to export results into");
  run_cmd
      ->add_option("--warmup", run_options.warmup,
                   "Leading runs per strategy excluded from the summary")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  run_cmd->add_flag("--interleave", run_options.interleave,
                    "Alternate strategies run by run instead of block order");
  run_cmd->add_flag("--export-events", run_options.export_events,
                    "Also export per-run scheduler event logs");
  run_cmd->add_flag("--export-device-logs", run_options.export_device_logs,
                    "Also export per-run device step logs");
  run_cmd
      ->add_option("--sampling-interval-ms", run_options.sampling_interval_ms,
                   "Emulated power meter sampling interval")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run_cmd->add_option("--framework-url", run_options.framework_url,
                      "Live mode framework base URL (overrides "
                      "LOOPBENCH_FRAMEWORK_URL)");
  run_cmd->add_option("--actuator-url", run_options.actuator_url,
                      "Live mode actuator base URL; when set, runs are "
                      "reconciled against the actuator's state");
  run_cmd
      ->add_option("--time-scale", run_options.time_scale,
                   "Live mode wall clock pacing factor (0 disables pacing)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  std::string summarize_dir;
  CLI::App* summarize_cmd = app.add_subcommand(
      "summarize", "Recompute the summary from an exported runs.csv");
  summarize_cmd->add_option("dir", summarize_dir, "Results directory")
      ->required();

  std::string framework_host = "127.0.0.1";
  int framework_port = 8420;
  CLI::App* framework_cmd = app.add_subcommand(
      "framework", "Serve the service registry, orchestration, and "
                   "authorization systems over HTTP");
  framework_cmd->add_option("--host", framework_host, "Bind address")
      ->capture_default_str();
  framework_cmd->add_option("--port", framework_port, "Bind port")
      ->capture_default_str();

  std::string actuator_host = "127.0.0.1";
  int actuator_port = 8421;
  double actuator_limit = 25.0;
  CLI::App* actuator_cmd =
      app.add_subcommand("actuator", "Serve a standalone actuator over HTTP");
  actuator_cmd->add_option("--host", actuator_host, "Bind address")
      ->capture_default_str();
  actuator_cmd->add_option("--port", actuator_port, "Bind port")
      ->capture_default_str();
  actuator_cmd
      ->add_option("--limit", actuator_limit,
                   "Activation limit in degrees Celsius")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(run_cmd)) {
      return command_run(run_options);
    }
    if (app.got_subcommand(summarize_cmd)) {
      return command_summarize(summarize_dir);
    }
    if (app.got_subcommand(framework_cmd)) {
      return command_framework(framework_host, framework_port);
    }
    if (app.got_subcommand(actuator_cmd)) {
      return command_actuator(actuator_host, actuator_port, actuator_limit);
    }
  } catch (const loopbench::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const loopbench::RunAborted& e) {
    std::cerr << "run aborted: " << e.what() << "\n";
    return 3;
  } catch (const loopbench::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
