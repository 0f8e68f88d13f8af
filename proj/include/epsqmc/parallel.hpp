// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace epsqmc
{

/// Environment variable capping the number of worker threads.
inline constexpr const char* kWorkerEnv = "EPSQMC_MAX_WORKERS";

// Resolve a requested worker count: 0 means "hardware concurrency", and the
// result is always capped by EPSQMC_MAX_WORKERS when that is set.
unsigned resolve_workers(unsigned requested);

// Split [0, count) into contiguous shards and run body(begin, end, shard) on
// up to `workers` threads. Shards are independent of scheduling; callers
// reduce per-shard results in shard order.
void parallel_shards(std::uint64_t count,
                     unsigned workers,
                     const std::function<void(std::uint64_t, std::uint64_t, unsigned)>& body);

}  // namespace epsqmc
