#pragma once

#include <cstddef>
#include <functional>

namespace cyclekit {

// Number of worker threads. CYCLEKIT_THREADS overrides the hardware count;
// values below 1 are clamped to 1.
int worker_count();

// Run fn(chunk) for chunk in [0, num_chunks). Chunk boundaries are chosen by
// the caller and never depend on the worker count, so any reduction done in
// chunk order is reproducible. Exceptions from workers are rethrown (first
// one wins).
void parallel_for_chunks(std::size_t num_chunks,
                         const std::function<void(std::size_t)>& fn);

// Split n items into chunks of at most chunk_size and run
// fn(begin, end, chunk_index) for each. Same determinism contract.
void parallel_for_ranges(std::size_t n, std::size_t chunk_size,
                         const std::function<void(std::size_t, std::size_t,
                                                  std::size_t)>& fn);

}  // namespace cyclekit
