#pragma once

#include <cstddef>
#include <functional>

namespace eegbench {

/// Worker cap from EEGBENCH_THREADS (unset or invalid: hardware concurrency).
/// A value of 1 selects deterministic single-threaded execution everywhere.
std::size_t thread_count();

/// Runs fn(i) for i in [0, n). Units must write only to their own slot;
/// the first exception thrown by any unit is rethrown after all join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace eegbench
