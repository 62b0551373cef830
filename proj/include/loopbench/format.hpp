/*
 * Copyright (c) 2026, the loopbench contributors.
 * All rights reserved.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <string>
#include <system_error>

#include "loopbench/types.hpp"

namespace loopbench {

/// Shortest decimal string that round-trips back to the same double.
inline std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) {
    return std::to_string(value);
  }
  return std::string(buf, ptr);
}

inline double parse_double(const std::string& text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("not a number: '" + text + "'");
  }
  return value;
}

/// Renders microseconds since the Unix epoch as ISO-8601 UTC with
/// microsecond precision, e.g. "2026-08-17T09:15:02.000123Z".
inline std::string iso8601_utc_us(std::int64_t us_since_epoch) {
  std::time_t secs = static_cast<std::time_t>(us_since_epoch / 1'000'000);
  std::int64_t frac = us_since_epoch % 1'000'000;
  if (frac < 0) {
    frac += 1'000'000;
    secs -= 1;
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%06dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<int>(frac));
  return buf;
}

/// Inverse of iso8601_utc_us. Accepts a trailing 'Z' and 0-6 fractional
/// digits.
inline std::int64_t parse_iso8601_us(const std::string& text) {
  std::tm tm{};
  int us = 0;
  char frac[8] = {0};
  int fields = std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%6[0-9]Z",
                           &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour,
                           &tm.tm_min, &tm.tm_sec, frac);
  if (fields < 6) {
    throw ConfigError("bad ISO-8601 timestamp: '" + text + "'");
  }
  if (fields == 7) {
    std::string digits(frac);
    while (digits.size() < 6) digits.push_back('0');
    us = std::stoi(digits);
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  std::time_t secs = timegm(&tm);
  return static_cast<std::int64_t>(secs) * 1'000'000 + us;
}

}  // namespace loopbench
