#ifndef TRUNCFILTER_PARALLEL_HPP
#define TRUNCFILTER_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace truncfilter {

/// Worker count: hardware concurrency capped by TRUNCFILTER_THREADS when set.
unsigned worker_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once; callers
/// write results into slot i, so the output never depends on scheduling.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace truncfilter

#endif
