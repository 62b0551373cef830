/*
 * Copyright (c) 2026, the loopbench contributors.
 * All rights reserved.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

/// Umbrella header. Pulls in the whole library; HTTP-free consumers can
/// include the individual headers instead (everything except http_cloud.hpp
/// and live.hpp is network-free).

#include "loopbench/bench.hpp"
#include "loopbench/cloud.hpp"
#include "loopbench/devices.hpp"
#include "loopbench/energy.hpp"
#include "loopbench/format.hpp"
#include "loopbench/http_cloud.hpp"
#include "loopbench/live.hpp"
#include "loopbench/power.hpp"
#include "loopbench/scheduler.hpp"
#include "loopbench/trace.hpp"
#include "loopbench/types.hpp"
