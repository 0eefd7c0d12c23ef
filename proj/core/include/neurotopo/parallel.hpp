#pragma once

#include <cstddef>
#include <functional>

namespace neurotopo {

/// Number of logical cores, at least 1.
unsigned default_jobs();

/// Runs fn(i) for i in [0, count) on up to `jobs` worker threads. Work items
/// must write to disjoint outputs. If any item throws, the exception from the
/// lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned jobs,
                  const std::function<void(std::size_t)>& fn);

}  // namespace neurotopo
