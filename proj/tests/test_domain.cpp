/*
 * Copyright (c) 2026, the loopbench contributors.
 * All rights reserved.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <loopbench/energy.hpp>
#include <loopbench/format.hpp>
#include <loopbench/trace.hpp>
#include <loopbench/types.hpp>

using namespace loopbench;

TEST_CASE("temperature enforces its representable range") {
  CHECK(Temperature(25.0).celsius() == 25.0);
  CHECK(Temperature(-50.0).celsius() == -50.0);
  CHECK(Temperature(100.0).celsius() == 100.0);
  CHECK_THROWS_AS(Temperature(-50.1), Error);
  CHECK_THROWS_AS(Temperature(100.1), Error);
  CHECK_THROWS_AS(Temperature(std::nan("")), Error);
  CHECK_THROWS_AS(Temperature(std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("limit defaults to 25") {
  CHECK(Limit{}.threshold.celsius() == 25.0);
}

TEST_CASE("should_trigger is at-or-above") {
  Limit limit{Temperature(25.0)};
  CHECK_FALSE(should_trigger(Temperature(24.9), limit));
  CHECK(should_trigger(Temperature(25.0), limit));
  CHECK(should_trigger(Temperature(30.0), limit));
}

TEST_CASE("energy rejects negative amounts") {
  CHECK(Energy(0.0).mws() == 0.0);
  CHECK_THROWS_AS(Energy(-1.0), Error);
  Energy total(1.5);
  total += Energy(2.5);
  CHECK(total.mws() == 4.0);
}

TEST_CASE("generate_trace rejects odd lengths") {
  CHECK_THROWS_AS(generate_trace(3, Limit{}, 1), InvalidTraceLength);
}

TEST_CASE("generate_trace empty case") {
  ValueTrace trace = generate_trace(0, Limit{}, 7);
  CHECK(trace.values.empty());
}

TEST_CASE("generate_trace default shape: 50 below then 50 at-or-above") {
  Limit limit{Temperature(25.0)};
  ValueTrace trace = generate_trace(100, limit, 1);
  REQUIRE(trace.size() == 100);
  for (std::size_t i = 0; i < 50; ++i) {
    INFO("index " << i);
    CHECK(trace.values[i].celsius() < 25.0);
  }
  for (std::size_t i = 50; i < 100; ++i) {
    INFO("index " << i);
    CHECK(trace.values[i].celsius() >= 25.0);
  }
}

TEST_CASE("generate_trace trigger count by brute-force predicate count") {
  Limit limit{Temperature(25.0)};
  ValueTrace trace = generate_trace(10, limit, 42);
  std::size_t triggers = 0;
  for (Temperature value : trace.values) {
    if (should_trigger(value, limit)) {
      triggers++;
    }
  }
  CHECK(triggers == 5);
}

TEST_CASE("generate_trace draws from the blocks around the limit") {
  Limit limit{Temperature(25.0)};
  ValueTrace trace = generate_trace(200, limit, 9);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(trace.values[i].celsius() >= 15.0);
    CHECK(trace.values[i].celsius() <= 24.0);
  }
  for (std::size_t i = 100; i < 200; ++i) {
    CHECK(trace.values[i].celsius() >= 26.0);
    CHECK(trace.values[i].celsius() <= 35.0);
  }
}

TEST_CASE("generate_trace is a pure function") {
  std::mt19937_64 pick(101);
  for (int round = 0; round < 50; ++round) {
    std::size_t n = 2 * (pick() % 64);
    double threshold = -30.0 + static_cast<double>(pick() % 110);
    Limit limit{Temperature(threshold)};
    std::uint64_t seed = pick();
    ValueTrace a = generate_trace(n, limit, seed);
    ValueTrace b = generate_trace(n, limit, seed);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.values[i].celsius() == b.values[i].celsius());
    }
  }
}

TEST_CASE("generated traces trigger on exactly half the values") {
  std::mt19937_64 pick(202);
  for (int round = 0; round < 50; ++round) {
    std::size_t n = 2 * (1 + pick() % 64);
    double threshold = -30.0 + static_cast<double>(pick() % 110);
    Limit limit{Temperature(threshold)};
    ValueTrace trace = generate_trace(n, limit, pick());
    std::size_t triggers = 0;
    for (Temperature value : trace.values) {
      if (should_trigger(value, limit)) {
        triggers++;
      }
    }
    CHECK(triggers == n / 2);
  }
}

TEST_CASE("trace CSV export carries index, value, and the trigger flag") {
  Limit limit{Temperature(25.0)};
  ValueTrace trace = generate_trace(4, limit, 3);
  std::ostringstream out;
  write_trace_csv(trace, out);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "index,value,above_limit");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::size_t first = line.find(',');
    std::size_t second = line.find(',', first + 1);
    REQUIRE(first != std::string::npos);
    REQUIRE(second != std::string::npos);
    CHECK(std::stoul(line.substr(0, first)) == rows);
    double value = parse_double(line.substr(first + 1, second - first - 1));
    std::string flag = line.substr(second + 1);
    CHECK(flag == (value >= 25.0 ? "1" : "0"));
    rows++;
  }
  CHECK(rows == 4);
}

namespace {

ComponentId test_component() {
  return ComponentId{"sensor", ComponentKind::sensor};
}

std::vector<PowerSample> constant_stream(double mw, Micros step_us,
                                         std::size_t count) {
  std::vector<PowerSample> samples;
  for (std::size_t i = 0; i < count; ++i) {
    samples.push_back(PowerSample{test_component(),
                                  static_cast<Micros>(i) * step_us, mw});
  }
  return samples;
}

}  // namespace

TEST_CASE("integrate_energy of constant power is exactly P*T") {
  std::vector<PowerSample> samples{
      PowerSample{test_component(), 0, 100.0},
      PowerSample{test_component(), seconds_to_us(10.0), 100.0}};
  CHECK(integrate_energy(samples).mws() == 1000.0);
}

TEST_CASE("integrate_energy degenerate streams are zero") {
  CHECK(integrate_energy(std::vector<PowerSample>{}).mws() == 0.0);
  std::vector<PowerSample> one{PowerSample{test_component(), 0, 100.0}};
  CHECK(integrate_energy(one).mws() == 0.0);
}

TEST_CASE("integrate_energy rejects unsorted and duplicate timestamps") {
  std::vector<PowerSample> dup{PowerSample{test_component(), 5, 1.0},
                               PowerSample{test_component(), 5, 2.0}};
  CHECK_THROWS_AS(integrate_energy(dup), InvalidSampleStream);
  std::vector<PowerSample> back{PowerSample{test_component(), 5, 1.0},
                                PowerSample{test_component(), 4, 2.0}};
  CHECK_THROWS_AS(integrate_energy(back), InvalidSampleStream);
}

TEST_CASE("integrate_energy linear ramp against a dense-sampling oracle") {
  // 0 -> 100 mW over 10 s. Trapezoid is exact for linear power, so the
  // coarse and the 1 ms dense streams must both give 500 mWs.
  auto ramp_at = [](Micros t) {
    return 100.0 * us_to_seconds(t) / 10.0;
  };
  std::vector<PowerSample> coarse;
  for (Micros t = 0; t <= seconds_to_us(10.0); t += seconds_to_us(1.0)) {
    coarse.push_back(PowerSample{test_component(), t, ramp_at(t)});
  }
  std::vector<PowerSample> dense;
  for (Micros t = 0; t <= seconds_to_us(10.0); t += 1000) {
    dense.push_back(PowerSample{test_component(), t, ramp_at(t)});
  }
  double coarse_mws = integrate_energy(coarse).mws();
  double dense_mws = integrate_energy(dense).mws();
  CHECK(coarse_mws == Catch::Approx(500.0).margin(1e-9));
  CHECK(coarse_mws == Catch::Approx(dense_mws).margin(1e-6));
}

TEST_CASE("integrate_energy is additive over adjacent streams") {
  std::mt19937_64 pick(303);
  for (int round = 0; round < 50; ++round) {
    std::size_t n = 3 + pick() % 40;
    std::vector<PowerSample> samples = constant_stream(0.0, 1, n);
    Micros t = 0;
    for (auto& sample : samples) {
      t += 1 + static_cast<Micros>(pick() % 500'000);
      sample.timestamp_us = t;
      sample.power_mw = static_cast<double>(pick() % 5000);
    }
    std::size_t cut = 1 + pick() % (n - 1);
    std::vector<PowerSample> left(samples.begin(), samples.begin() + cut);
    std::vector<PowerSample> right(samples.begin() + cut - 1, samples.end());
    double whole = integrate_energy(samples).mws();
    double parts = integrate_energy(left).mws() + integrate_energy(right).mws();
    CHECK(whole == Catch::Approx(parts).margin(1e-9));
  }
}

TEST_CASE("format_double round-trips through parse_double") {
  for (double value : {0.0, 1.0, 0.93, 114.0 / 125.0, 4102.857142857143,
                       1e-9, 123456789.125}) {
    CHECK(parse_double(format_double(value)) == value);
  }
  CHECK_THROWS_AS(parse_double("not-a-number"), ConfigError);
}

TEST_CASE("iso8601 timestamps round-trip at microsecond precision") {
  for (std::int64_t us : {std::int64_t{0}, std::int64_t{1},
                          std::int64_t{1'755'388'800'123'456}}) {
    CHECK(parse_iso8601_us(iso8601_utc_us(us)) == us);
  }
  CHECK(iso8601_utc_us(0) == "1970-01-01T00:00:00.000000Z");
}
