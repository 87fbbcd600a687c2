/**
 * Index-space parallel loop.
 *
 * Workers pull indices from a shared counter; callers write results into
 * preallocated per-index slots and reduce sequentially afterwards, so the
 * result never depends on the number of jobs.
 */

#ifndef CTMAP_PARALLEL_HPP
#define CTMAP_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ctmap::par {

template <typename Fn>
void parallel_for(size_t n, unsigned jobs, Fn &&fn) {
  if (jobs <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned workers =
      unsigned(std::min<size_t>(jobs, n));
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto &t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ctmap::par

#endif  // CTMAP_PARALLEL_HPP
