#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace lcpa {

// Worker count: LCPA_WORKERS if set to a positive integer, else the number
// of hardware threads.
inline std::size_t default_workers() {
  if (const char* env = std::getenv("LCPA_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Thrown by parallel_for: the lowest failing index plus the original error.
class IndexedFailure : public std::exception {
 public:
  IndexedFailure(std::size_t index, std::exception_ptr cause) : index_(index), cause_(std::move(cause)) {
    try {
      std::rethrow_exception(cause_);
    } catch (const std::exception& e) {
      what_ = "item " + std::to_string(index_) + ": " + e.what();
    } catch (...) {
      what_ = "item " + std::to_string(index_) + ": unknown error";
    }
  }

  std::size_t index() const noexcept { return index_; }
  const std::exception_ptr& cause() const noexcept { return cause_; }
  const char* what() const noexcept override { return what_.c_str(); }

 private:
  std::size_t index_;
  std::exception_ptr cause_;
  std::string what_;
};

// Runs fn(i) for i in [0, count) on up to `workers` threads. Items are
// claimed in index order; after a failure no new items start.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::size_t failed_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;

  auto worker = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        stop = true;
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) throw IndexedFailure(failed_index, failure);
}

}  // namespace lcpa
