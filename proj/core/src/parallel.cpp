#include "gglr/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gglr {

int thread_count() {
  if (const char* env = std::getenv("GGLR_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 256L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_chunks(Index n, Index chunks,
                     const std::function<void(Index, Index, Index)>& body) {
  if (n <= 0) return;
  chunks = std::clamp<Index>(chunks, 1, n);
  auto range = [&](Index c) {
    return std::pair<Index, Index>{n * c / chunks, n * (c + 1) / chunks};
  };
  const int workers = static_cast<int>(std::min<Index>(thread_count(), chunks));
  if (workers <= 1) {
    for (Index c = 0; c < chunks; ++c) {
      const auto [b, e] = range(c);
      body(c, b, e);
    }
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (Index c = next++; c < chunks; c = next++) {
        try {
          const auto [b, e] = range(c);
          body(c, b, e);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace gglr
