#ifndef CAUSEWAY_PARALLEL_H_
#define CAUSEWAY_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace causeway {

// Runs fn(i) for i in [0, n) on up to hardware_concurrency() threads. Work
// items must write only to their own slot; the first exception is rethrown
// after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned max_threads = 0) {
  unsigned threads = max_threads != 0 ? max_threads
                                      : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace causeway

#endif  // CAUSEWAY_PARALLEL_H_
