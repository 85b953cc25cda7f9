#pragma once

#include <cstddef>
#include <functional>

namespace nijtoep {

// Number of worker threads. Defaults to a small multiple of the hardware,
// capped by the NIJTOEP_THREADS environment variable when set.
int thread_budget();

// Runs fn(i) for i in [0, count). Iterations must write disjoint state so the
// result does not depend on scheduling. Falls back to a serial loop for small
// counts or a budget of one.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace nijtoep
