/*
 * Copyright (c) 2026, the loopbench contributors.
 * All rights reserved.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "loopbench/cloud.hpp"
#include "loopbench/devices.hpp"
#include "loopbench/power.hpp"
#include "loopbench/scheduler.hpp"
#include "loopbench/trace.hpp"
#include "loopbench/types.hpp"

namespace loopbench {

enum class RunMode { sim, live };

inline const char* to_string(RunMode mode) {
  return mode == RunMode::sim ? "sim" : "live";
}

/// Experiment protocol parameters. Defaults reproduce the full benchmark:
/// 22 runs of 100 measurements per strategy, limit 25, first run excluded as
/// warm-up.
struct ExperimentConfig {
  int runs = 22;
  int measurements_per_run = 100;
  Limit limit{Temperature{25.0}};
  std::uint64_t seed = 1;
  int warmup_runs = 1;
  RunMode mode = RunMode::sim;
  PowerModel model = calibrate_default_model();
  std::vector<StrategyKind> strategies = {StrategyKind::time_driven,
                                          StrategyKind::event_driven};
  Micros sampling_interval_us = 100'000;  // PMD time base
  bool interleave = false;
  bool export_events = false;
  bool export_device_logs = false;

  void validate() const {
    if (runs <= 0 || warmup_runs < 0 || runs <= warmup_runs) {
      throw ConfigError("need runs > warmup_runs >= 0");
    }
    if (measurements_per_run < 0 || measurements_per_run % 2 != 0) {
      throw ConfigError("measurements_per_run must be even and non-negative");
    }
    if (strategies.empty()) {
      throw ConfigError("at least one strategy required");
    }
    if (sampling_interval_us <= 0) {
      throw ConfigError("sampling interval must be positive");
    }
    model.validate();
  }

  Strategy make_strategy(StrategyKind kind) const {
    StepTiming timing{model.measure_us, model.send_roundtrip_us};
    return kind == StrategyKind::time_driven
               ? Strategy::time_driven(timing)
               : Strategy::event_driven(limit, timing);
  }
};

/// One run's results: per-component energy, duration, message counts.
struct RunReport {
  StrategyKind strategy = StrategyKind::time_driven;
  int run_index = 0;
  std::array<EnergyReport, 3> energy;
  Micros duration_us = 0;
  std::uint64_t orchestrate_count = 0;
  std::uint64_t activation_count = 0;
  bool excluded = false;

  double total_mws() const {
    double total = 0.0;
    for (const EnergyReport& report : energy) {
      total += report.energy.mws();
    }
    return total;
  }
};

/// A report plus the raw logs it was computed from.
struct RunArtifacts {
  RunReport report;
  DeviceRunLog device;
};

/// Executes one simulated run on a fresh scheduler and local cloud.
inline RunArtifacts execute_sim_run(const ExperimentConfig& config,
                                    StrategyKind kind,
                                    const ValueTrace& trace, int run_index) {
  Scheduler scheduler;
  LocalCloud cloud;
  RunLoopOptions options;
  cloud.register_service(ServiceDescriptor{
      options.sensor_name, ServiceKind::sensor, "local://" + options.sensor_name,
      0});
  cloud.register_service(ServiceDescriptor{options.actuator_name,
                                           ServiceKind::actuator,
                                           "local://" + options.actuator_name,
                                           0});
  cloud.put_rule(
      AuthorizationRule{options.sensor_name, options.actuator_name, true});

  RunArtifacts artifacts;
  artifacts.device =
      run_loop(config.make_strategy(kind), trace, scheduler, cloud, options);

  RunReport& report = artifacts.report;
  report.strategy = kind;
  report.run_index = run_index;
  report.energy = account_energy(artifacts.device.events, config.model,
                                 artifacts.device.duration_us, run_index);
  report.duration_us = artifacts.device.duration_us;
  report.orchestrate_count = artifacts.device.orchestrate_count;
  report.activation_count = artifacts.device.activation_count;
  report.excluded = run_index < config.warmup_runs;
  return artifacts;
}

/// Runs the full protocol: every strategy over the identical seeded trace,
/// `runs` times each, warm-up runs flagged excluded. Strategies run in
/// separate blocks unless interleave is set. Deterministic for a fixed
/// config.
inline std::vector<RunArtifacts> run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.mode != RunMode::sim) {
    throw ConfigError("run_experiment only handles sim mode; use the live runner");
  }
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

  std::vector<RunArtifacts> artifacts;
  artifacts.reserve(order.size());
  for (const auto& [kind, run] : order) {
    artifacts.push_back(execute_sim_run(config, kind, trace, run));
  }
  return artifacts;
}

inline std::vector<RunReport> reports_of(
    const std::vector<RunArtifacts>& artifacts) {
  std::vector<RunReport> reports;
  reports.reserve(artifacts.size());
  for (const RunArtifacts& a : artifacts) {
    reports.push_back(a.report);
  }
  return reports;
}

/// Arithmetic mean and sample standard deviation.
struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

inline Stats compute_stats(std::span<const double> values) {
  Stats stats;
  stats.n = values.size();
  if (values.empty()) {
    return stats;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  stats.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) {
      sq += (v - stats.mean) * (v - stats.mean);
    }
    stats.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return stats;
}

struct StrategySummary {
  StrategyKind strategy = StrategyKind::time_driven;
  std::array<Stats, 3> energy_stats;  // indexed like kMeteredComponents
  double total_energy_mws = 0.0;      // over non-excluded runs, all components
  double mean_duration_us = 0.0;
  std::size_t included_runs = 0;
};

/// Cross-strategy comparison over non-excluded runs only.
struct ComparisonSummary {
  StrategySummary time_driven;
  StrategySummary event_driven;
  double percent_difference = 0.0;  // 100 * (1 - total_event / total_time)
};

inline StrategySummary summarize_strategy(std::span<const RunReport> reports,
                                          StrategyKind kind) {
  StrategySummary summary;
  summary.strategy = kind;
  std::array<std::vector<double>, 3> energies;
  std::vector<double> durations;
  for (const RunReport& report : reports) {
    if (report.strategy != kind || report.excluded) {
      continue;
    }
    for (ComponentKind component : kMeteredComponents) {
      energies[detail::kind_index(component)].push_back(
          report.energy[detail::kind_index(component)].energy.mws());
    }
    durations.push_back(static_cast<double>(report.duration_us));
    summary.total_energy_mws += report.total_mws();
    summary.included_runs++;
  }
  if (summary.included_runs == 0) {
    throw InsufficientData(std::string("no non-excluded runs for strategy ") +
                           to_string(kind));
  }
  for (ComponentKind component : kMeteredComponents) {
    summary.energy_stats[detail::kind_index(component)] =
        compute_stats(energies[detail::kind_index(component)]);
  }
  summary.mean_duration_us = compute_stats(durations).mean;
  return summary;
}

inline ComparisonSummary summarize(std::span<const RunReport> reports) {
  ComparisonSummary summary;
  summary.time_driven =
      summarize_strategy(reports, StrategyKind::time_driven);
  summary.event_driven =
      summarize_strategy(reports, StrategyKind::event_driven);
  if (summary.time_driven.total_energy_mws <= 0.0) {
    throw InsufficientData("time-driven total energy is zero");
  }
  // Normalize per included run so interrupted sessions with unequal run
  // counts still compare like for like.
  const double per_run_time = summary.time_driven.total_energy_mws /
                              static_cast<double>(summary.time_driven.included_runs);
  const double per_run_event =
      summary.event_driven.total_energy_mws /
      static_cast<double>(summary.event_driven.included_runs);
  summary.percent_difference = 100.0 * (1.0 - per_run_event / per_run_time);
  return summary;
}

namespace detail {

inline void write_text_file(const std::filesystem::path& path,
                            const std::function<void(std::ostream&)>& fill) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  fill(out);
  out.flush();
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

inline std::string run_tag(StrategyKind kind, int run_index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%s_run%02d", to_string(kind), run_index);
  return buf;
}

}  // namespace detail

inline void write_runs_csv(std::span<const RunReport> reports,
                           std::ostream& out) {
  out << "strategy,run_index,excluded,duration_us,orchestrate_count,"
         "activation_count,sensor_mWs,actuator_mWs,framework_mWs,total_mWs\n";
  for (const RunReport& r : reports) {
    out << to_string(r.strategy) << ',' << r.run_index << ','
        << (r.excluded ? 1 : 0) << ',' << r.duration_us << ','
        << r.orchestrate_count << ',' << r.activation_count;
    for (ComponentKind kind : kMeteredComponents) {
      out << ','
          << format_double(r.energy[detail::kind_index(kind)].energy.mws());
    }
    out << ',' << format_double(r.total_mws()) << '\n';
  }
}

/// Parses a runs.csv produced by write_runs_csv.
inline std::vector<RunReport> parse_runs_csv(std::istream& in) {
  std::vector<RunReport> reports;
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("runs.csv is empty");
  }
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) {
      fields.push_back(field);
    }
    if (fields.size() != 10) {
      throw ConfigError("runs.csv: expected 10 fields, got " +
                        std::to_string(fields.size()));
    }
    RunReport report;
    auto kind = parse_strategy_kind(fields[0]);
    if (!kind) {
      throw ConfigError("runs.csv: unknown strategy '" + fields[0] + "'");
    }
    report.strategy = *kind;
    report.run_index = std::stoi(fields[1]);
    report.excluded = fields[2] == "1";
    report.duration_us = std::stoll(fields[3]);
    report.orchestrate_count = std::stoull(fields[4]);
    report.activation_count = std::stoull(fields[5]);
    for (ComponentKind component : kMeteredComponents) {
      std::size_t i = detail::kind_index(component);
      report.energy[i] = EnergyReport{
          ComponentId{to_string(component), component}, report.run_index,
          Energy(parse_double(fields[6 + i])), report.duration_us};
    }
    reports.push_back(report);
  }
  return reports;
}

/// Long-format summary CSV: `key,strategy,component,value`.
inline void write_summary_csv(const ComparisonSummary& summary,
                              std::ostream& out) {
  out << "key,strategy,component,value\n";
  for (const StrategySummary* s : {&summary.time_driven,
                                   &summary.event_driven}) {
    for (ComponentKind kind : kMeteredComponents) {
      const Stats& stats = s->energy_stats[detail::kind_index(kind)];
      out << "mean_energy_mWs," << to_string(s->strategy) << ','
          << to_string(kind) << ',' << format_double(stats.mean) << '\n';
      out << "stddev_energy_mWs," << to_string(s->strategy) << ','
          << to_string(kind) << ',' << format_double(stats.stddev) << '\n';
    }
    out << "total_energy_mWs," << to_string(s->strategy) << ",,"
        << format_double(s->total_energy_mws) << '\n';
    out << "mean_duration_us," << to_string(s->strategy) << ",,"
        << format_double(s->mean_duration_us) << '\n';
    out << "included_runs," << to_string(s->strategy) << ",,"
        << s->included_runs << '\n';
  }
  out << "percent_difference,,," << format_double(summary.percent_difference)
      << '\n';
}

/// Reads back the percent_difference row of a summary.csv.
inline double parse_summary_percent_difference(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("percent_difference,,,", 0) == 0) {
      return parse_double(line.substr(std::string("percent_difference,,,").size()));
    }
  }
  throw ConfigError("summary.csv has no percent_difference row");
}

inline void write_summary_text(const ComparisonSummary& summary,
                               std::ostream& out) {
  auto row = [&out](const char* label, double time_value, double event_value,
                    const char* unit) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-22s %16.2f %16.2f  %s\n", label,
                  time_value, event_value, unit);
    out << buf;
  };
  out << "control-loop strategy comparison (non-excluded runs)\n";
  out << "-----------------------------------------------------------------\n";
  char header[160];
  std::snprintf(header, sizeof(header), "%-22s %16s %16s\n", "",
                "time-driven", "event-driven");
  out << header;
  for (ComponentKind kind : kMeteredComponents) {
    std::string label = std::string(to_string(kind)) + " mean";
    row(label.c_str(),
        summary.time_driven.energy_stats[detail::kind_index(kind)].mean,
        summary.event_driven.energy_stats[detail::kind_index(kind)].mean,
        "mWs");
    std::string sigma = std::string(to_string(kind)) + " stddev";
    row(sigma.c_str(),
        summary.time_driven.energy_stats[detail::kind_index(kind)].stddev,
        summary.event_driven.energy_stats[detail::kind_index(kind)].stddev,
        "mWs");
  }
  row("total energy", summary.time_driven.total_energy_mws,
      summary.event_driven.total_energy_mws, "mWs");
  row("mean run duration", us_to_seconds(summary.time_driven.mean_duration_us),
      us_to_seconds(summary.event_driven.mean_duration_us), "s");
  row("included runs", static_cast<double>(summary.time_driven.included_runs),
      static_cast<double>(summary.event_driven.included_runs), "");
  char tail[160];
  std::snprintf(tail, sizeof(tail),
                "\nevent-driven consumed %.2f%% less energy than time-driven\n",
                summary.percent_difference);
  out << tail;
}

/// Writes every result file into `dir`: trace.csv, runs.csv, one PMD sample
/// CSV per component per run, summary.csv, summary.txt, and (optionally)
/// per-run event and device logs. Re-running with the same inputs rewrites
/// identical bytes.
inline void export_results(const std::vector<RunArtifacts>& artifacts,
                           const ComparisonSummary& summary,
                           const ExperimentConfig& config,
                           const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "pmd", ec);
  if (ec) {
    throw IoError("cannot create output directory: " + (dir / "pmd").string());
  }

  const ValueTrace trace = generate_trace(
      static_cast<std::size_t>(config.measurements_per_run), config.limit,
      config.seed);
  detail::write_text_file(dir / "trace.csv", [&trace](std::ostream& out) {
    write_trace_csv(trace, out);
  });

  detail::write_text_file(dir / "runs.csv", [&artifacts](std::ostream& out) {
    std::vector<RunReport> reports = reports_of(artifacts);
    write_runs_csv(reports, out);
  });

  for (const RunArtifacts& a : artifacts) {
    const std::string tag =
        detail::run_tag(a.report.strategy, a.report.run_index);
    const PmdStreams streams =
        sample_run(a.device.events, config.model, config.sampling_interval_us,
                   a.device.duration_us);
    for (ComponentKind kind : kMeteredComponents) {
      const fs::path path =
          dir / "pmd" / (tag + "_" + to_string(kind) + ".csv");
      detail::write_text_file(path, [&streams, kind](std::ostream& out) {
        write_pmd_csv(streams.of(kind), out);
      });
    }
    if (config.export_events) {
      fs::create_directories(dir / "events", ec);
      detail::write_text_file(dir / "events" / (tag + ".csv"),
                              [&a](std::ostream& out) {
                                write_event_log_csv(a.device.events, out);
                              });
    }
    if (config.export_device_logs) {
      fs::create_directories(dir / "device_logs", ec);
      detail::write_text_file(dir / "device_logs" / (tag + ".csv"),
                              [&a](std::ostream& out) {
                                write_device_log_csv(a.device, out);
                              });
    }
  }

  detail::write_text_file(dir / "summary.csv", [&summary](std::ostream& out) {
    write_summary_csv(summary, out);
  });
  detail::write_text_file(dir / "summary.txt", [&summary](std::ostream& out) {
    write_summary_text(summary, out);
  });
}

}  // namespace loopbench
