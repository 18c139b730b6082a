#pragma once

#include <cstddef>
#include <functional>

namespace cltcert {

/// Environment variable holding the default worker count.
inline constexpr const char* kWorkersEnv = "CLTCERT_WORKERS";

/// Worker count from CLTCERT_WORKERS, else hardware concurrency (>= 1).
std::size_t default_workers();

/// Runs task(i) for i in [0, count) on up to `workers` threads. Tasks must
/// write to disjoint outputs; results then do not depend on the schedule.
/// The first exception thrown by a task is rethrown after all threads join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task,
                  std::size_t workers = default_workers());

}  // namespace cltcert
