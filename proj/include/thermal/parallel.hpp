#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace thermal {

// Number of worker threads to use, capped by the THERMAL_SPECTRA_THREADS
// environment variable (>= 1).
std::size_t worker_thread_cap();

// Runs body(i) for i in [0, n). Work is split into contiguous chunks, one per
// worker. Iterations must be independent of each other.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Chunked map-reduce with a schedule-independent result: partials are combined
// in chunk order, so any thread count yields bit-identical output.
template <class Acc, class Map, class Combine>
Acc parallel_map_reduce(std::size_t n, Acc init, Map map_chunk, Combine combine) {
  const std::size_t workers = worker_thread_cap();
  const std::size_t n_chunks = std::min<std::size_t>(std::max<std::size_t>(workers, 1), std::max<std::size_t>(n, 1));
  std::vector<Acc> partials(n_chunks, init);
  parallel_for(n_chunks, [&](std::size_t c) {
    const std::size_t lo = n * c / n_chunks;
    const std::size_t hi = n * (c + 1) / n_chunks;
    partials[c] = map_chunk(lo, hi);
  });
  Acc total = init;
  for (const Acc& p : partials) total = combine(total, p);
  return total;
}

}  // namespace thermal
