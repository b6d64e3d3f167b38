#pragma once

#include <functional>

namespace anchormc {

// Runs fn(0..n_jobs-1) on up to n_workers threads. Results must be written
// to per-job slots; the first exception is rethrown after all workers join.
// n_workers <= 1 degrades to a plain loop.
void parallel_for(int n_jobs, int n_workers, const std::function<void(int)>& fn);

// Hardware concurrency with a floor of 1.
int default_workers();

}  // namespace anchormc
