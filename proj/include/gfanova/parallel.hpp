#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "gfanova/types.hpp"

namespace gfanova {

// Worker count used when a caller passes 0: FANOVA_THREADS if set, otherwise
// the hardware concurrency. Results never depend on this value.
unsigned default_thread_count();

// Runs body(i) for i in [0, n). Each index is visited exactly once; callers
// write into per-index slots so the outcome is independent of scheduling.
// The first exception thrown by any body is rethrown on the calling thread.
void parallel_for(Index n, const std::function<void(Index)>& body, unsigned threads = 0);

// Independent random stream for (seed, stream index, purpose tag).
std::mt19937_64 derived_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t tag = 0);

// One 64-bit value from derived_stream, usable as a seed for nested work.
std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t tag = 0);

}  // namespace gfanova
