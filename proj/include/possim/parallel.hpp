#pragma once

#include <cstddef>
#include <functional>

namespace possim {

// Global thread budget for the whole library; 0 means hardware concurrency.
void set_thread_count(int k);
int thread_count();

// Runs fn(i) for i in [0, n). Work is split into contiguous blocks; each
// fn(i) must derive any randomness from a per-index substream so the result
// is identical regardless of how the blocks are scheduled.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace possim
