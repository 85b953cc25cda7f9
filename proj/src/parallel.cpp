#include "nijtoep/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nijtoep {

int thread_budget() {
  static const int budget = [] {
    unsigned hw = std::thread::hardware_concurrency();
    int n = static_cast<int>(std::min(hw == 0 ? 1u : hw, 8u));
    if (const char* env = std::getenv("NIJTOEP_THREADS")) {
      char* end = nullptr;
      long cap = std::strtol(env, &end, 10);
      if (end != env && cap >= 1) n = std::min<long>(n, cap);
    }
    return n;
  }();
  return budget;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const int workers = thread_budget();
  if (workers <= 1 || count < 64) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  const std::size_t chunk = std::max<std::size_t>(1, count / (4 * static_cast<std::size_t>(workers)));
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (;;) {
          if (failed.load(std::memory_order_relaxed)) return;
          std::size_t begin = next.fetch_add(chunk);
          if (begin >= count) return;
          std::size_t end = std::min(count, begin + chunk);
          for (std::size_t i = begin; i < end; ++i) fn(i);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace nijtoep
