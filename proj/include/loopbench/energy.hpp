/*
 * Copyright (c) 2026, the loopbench contributors.
 * All rights reserved.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <span>
#include <vector>

#include "loopbench/types.hpp"

namespace loopbench {

/// One time-precise reading of an emulated power measurement device.
struct PowerSample {
  ComponentId component;
  Micros timestamp_us = 0;
  double power_mw = 0.0;
};

/// Trapezoidal integral of a single component's power samples, in mWs.
/// Exact for piecewise-constant and piecewise-linear power. Streams with
/// fewer than two samples integrate to zero.
inline Energy integrate_energy(std::span<const PowerSample> samples) {
  if (samples.size() < 2) {
    return Energy(0.0);
  }
  double total_mws = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const PowerSample& prev = samples[i - 1];
    const PowerSample& cur = samples[i];
    if (cur.timestamp_us <= prev.timestamp_us) {
      throw InvalidSampleStream(
          "sample timestamps must be strictly increasing");
    }
    if (prev.power_mw < 0.0 || cur.power_mw < 0.0) {
      throw InvalidSampleStream("negative power sample");
    }
    const double dt_s = us_to_seconds(cur.timestamp_us - prev.timestamp_us);
    total_mws += 0.5 * (prev.power_mw + cur.power_mw) * dt_s;
  }
  return Energy(total_mws);
}

inline Energy integrate_energy(const std::vector<PowerSample>& samples) {
  return integrate_energy(std::span<const PowerSample>(samples));
}

}  // namespace loopbench
