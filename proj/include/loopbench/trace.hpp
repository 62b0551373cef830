/*
 * Copyright (c) 2026, the loopbench contributors.
 * All rights reserved.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "loopbench/format.hpp"
#include "loopbench/types.hpp"

namespace loopbench {

/// The predefined sequence of sensor readings that drives a test run.
/// Generated traces hold n/2 values strictly below the limit followed by
/// n/2 values at or above it.
struct ValueTrace {
  std::vector<Temperature> values;
  Limit limit;
  std::uint64_t seed = 0;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
};

namespace detail {

// Uniform double in [0, 1) from the raw engine stream. std::mt19937_64 output
// is fully specified by the standard, so traces are identical across
// platforms; std::uniform_real_distribution is not and must be avoided here.
inline double next_unit(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

inline Temperature draw_rounded(std::mt19937_64& engine, double lo, double hi) {
  double v = lo + next_unit(engine) * (hi - lo);
  // Sensor readings carry two decimals. Rounding stays within [lo, hi].
  return Temperature(std::round(v * 100.0) / 100.0);
}

}  // namespace detail

/// Deterministically generates a trace of n values: the first n/2 drawn from
/// [limit-10, limit-1], the last n/2 from [limit+1, limit+10]. Same
/// (n, limit, seed) always yields the identical trace.
inline ValueTrace generate_trace(std::size_t n, Limit limit,
                                 std::uint64_t seed) {
  if (n % 2 != 0) {
    throw InvalidTraceLength("trace length must be even, got " +
                             std::to_string(n));
  }
  const double threshold = limit.threshold.celsius();
  const double below_lo = std::max(Temperature::kMinCelsius, threshold - 10.0);
  const double below_hi = threshold - 1.0;
  const double above_lo = threshold + 1.0;
  const double above_hi = std::min(Temperature::kMaxCelsius, threshold + 10.0);
  if (n > 0 && (below_lo > below_hi || above_lo > above_hi)) {
    throw Error("limit too close to the representable temperature bounds");
  }

  ValueTrace trace;
  trace.limit = limit;
  trace.seed = seed;
  trace.values.reserve(n);
  std::mt19937_64 engine(seed);
  for (std::size_t i = 0; i < n / 2; ++i) {
    trace.values.push_back(detail::draw_rounded(engine, below_lo, below_hi));
  }
  for (std::size_t i = 0; i < n / 2; ++i) {
    trace.values.push_back(detail::draw_rounded(engine, above_lo, above_hi));
  }
  return trace;
}

/// CSV export: header `index,value,above_limit` with above_limit in {0,1}.
inline void write_trace_csv(const ValueTrace& trace, std::ostream& out) {
  out << "index,value,above_limit\n";
  for (std::size_t i = 0; i < trace.values.size(); ++i) {
    out << i << ',' << format_double(trace.values[i].celsius()) << ','
        << (should_trigger(trace.values[i], trace.limit) ? 1 : 0) << '\n';
  }
}

}  // namespace loopbench
