#include "cvmp/parcel_runner.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cvmp {

void for_each_parcel(std::size_t n, std::size_t threads,
                     const std::function<void(std::size_t)>& task) {
  if (n == 0) return;
  if (threads == 0) threads = 1;
  threads = std::min(threads, n);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mu;
  std::exception_ptr first_error;
  std::size_t first_index = n;

  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (i < first_index) {
          first_index = i;
          first_error = std::current_exception();
        }
        failed.store(true);
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cvmp
