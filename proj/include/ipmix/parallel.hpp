#pragma once

#include <functional>

namespace ipmix
{

/// Worker count: IPMIX_THREADS if set and positive, otherwise the hardware
/// concurrency (at least 1).
int thread_count();

/// Calls fn(i) for i in [0, n) on up to thread_count() threads. Work is
/// split into contiguous chunks; callers write into per-index slots, so
/// results do not depend on the thread count. The first exception thrown by
/// any worker is rethrown.
void parallel_for(int n, const std::function<void(int)>& fn);

} // namespace ipmix
