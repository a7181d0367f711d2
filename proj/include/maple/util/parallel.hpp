// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace maple {

/// Worker cap from MAPLE_LAB_THREADS; unset or 0 means hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Each index is handled exactly once and
/// bodies must only write to per-index state, so results do not depend on
/// the worker count. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace maple
