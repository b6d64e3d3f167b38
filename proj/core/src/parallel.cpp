#include "anchormc/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace anchormc {

int default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(int n_jobs, int n_workers,
                  const std::function<void(int)>& fn) {
  if (n_jobs <= 0) return;
  const int workers = std::min(n_workers, n_jobs);
  if (workers <= 1) {
    for (int j = 0; j < n_jobs; ++j) fn(j);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int j = next.fetch_add(1);
        if (j >= n_jobs) return;
        try {
          fn(j);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace anchormc
