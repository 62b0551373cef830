/*
 * Copyright (c) 2026, the loopbench contributors.
 * All rights reserved.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace loopbench {

// All timestamps and durations are integer microseconds since run start.
using Micros = std::int64_t;

inline constexpr double kMicrosPerSecond = 1e6;

inline Micros seconds_to_us(double seconds) {
  return static_cast<Micros>(std::llround(seconds * kMicrosPerSecond));
}

inline double us_to_seconds(Micros us) {
  return static_cast<double>(us) / kMicrosPerSecond;
}

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidTraceLength : Error {
  using Error::Error;
};
struct InvalidSampleStream : Error {
  using Error::Error;
};
struct SchedulingInPast : Error {
  using Error::Error;
};
struct InvalidInterval : Error {
  using Error::Error;
};
struct TraceExhausted : Error {
  using Error::Error;
};
struct CalibrationError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct RunAborted : Error {
  using Error::Error;
};
struct InsufficientData : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

/// Temperature in degrees Celsius, restricted to the sensor's representable
/// range at construction.
class Temperature {
 public:
  static constexpr double kMinCelsius = -50.0;
  static constexpr double kMaxCelsius = 100.0;

  Temperature() : value_(0.0) {}
  explicit Temperature(double celsius) : value_(celsius) {
    if (!std::isfinite(celsius) || celsius < kMinCelsius ||
        celsius > kMaxCelsius) {
      throw Error("temperature out of range [-50, 100]: " +
                  std::to_string(celsius));
    }
  }

  double celsius() const { return value_; }

  friend auto operator<=>(const Temperature&, const Temperature&) = default;

 private:
  double value_;
};

/// The activation threshold an incoming value is compared against.
struct Limit {
  Temperature threshold{25.0};

  friend auto operator<=>(const Limit&, const Limit&) = default;
};

/// True when the value reaches or exceeds the limit; values exactly at the
/// threshold trigger.
inline bool should_trigger(Temperature value, Limit limit) {
  return value.celsius() >= limit.threshold.celsius();
}

enum class ComponentKind { sensor, actuator, framework };

inline const char* to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::sensor:
      return "sensor";
    case ComponentKind::actuator:
      return "actuator";
    case ComponentKind::framework:
      return "framework";
  }
  return "unknown";
}

struct ComponentId {
  std::string name;
  ComponentKind kind;

  friend bool operator==(const ComponentId&, const ComponentId&) = default;
};

/// Energy in milliwatt-seconds (mWs). Never negative.
class Energy {
 public:
  Energy() : mws_(0.0) {}
  explicit Energy(double mws) : mws_(mws) {
    if (!std::isfinite(mws) || mws < 0.0) {
      throw Error("energy must be finite and non-negative: " +
                  std::to_string(mws));
    }
  }

  double mws() const { return mws_; }

  Energy& operator+=(Energy other) {
    mws_ += other.mws_;
    return *this;
  }
  friend Energy operator+(Energy a, Energy b) { return Energy(a.mws_ + b.mws_); }
  friend auto operator<=>(const Energy&, const Energy&) = default;

 private:
  double mws_;
};

}  // namespace loopbench
