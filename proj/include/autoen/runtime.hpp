#pragma once

// Execution plumbing shared by the fitting code: clocks (injectable for
// timing tests), cooperative deadlines and a schedule-independent parallel_for.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include "autoen/error.hpp"

namespace autoen {

class Clock {
 public:
  virtual ~Clock() = default;
  /// Seconds since an arbitrary fixed origin.
  virtual double now() const = 0;
};

class SteadyClock final : public Clock {
 public:
  double now() const override {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  }
};

inline const Clock& system_clock() {
  static const SteadyClock clock;
  return clock;
}

/// Real elapsed time plus an injected offset. advance() simulates a slow
/// operation without actually sleeping.
class OffsetClock final : public Clock {
 public:
  double now() const override { return base_.now() + offset_.load(); }
  void advance(double seconds) {
    double cur = offset_.load();
    while (!offset_.compare_exchange_weak(cur, cur + seconds)) {
    }
  }

 private:
  SteadyClock base_;
  std::atomic<double> offset_{0.0};
};

/// Time only moves when advanced explicitly; makes recorded timings reproducible.
class ManualClock final : public Clock {
 public:
  double now() const override { return t_.load(); }
  void advance(double seconds) {
    double cur = t_.load();
    while (!t_.compare_exchange_weak(cur, cur + seconds)) {
    }
  }

 private:
  std::atomic<double> t_{0.0};
};

/// Cooperative time budget polled by long-running fits.
struct Deadline {
  const Clock* clock = nullptr;
  double at = std::numeric_limits<double>::infinity();

  static Deadline none() { return {}; }
  static Deadline after(const Clock& c, double seconds) { return {&c, c.now() + seconds}; }

  bool expired() const { return clock != nullptr && clock->now() > at; }
  void check() const {
    if (expired()) fail(ErrorCode::BudgetExceeded, "time budget exhausted");
  }
};

namespace detail {
inline thread_local bool inside_parallel_region = false;
}

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs body(i) for i in [0, n). Each index is processed exactly once and
/// callers write results into per-index slots, so outputs never depend on
/// the schedule. Nested calls run serially on the calling thread.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = resolve_threads(threads);
  if (n == 0) return;
  if (threads <= 1 || n == 1 || detail::inside_parallel_region) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    detail::inside_parallel_region = true;
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
    detail::inside_parallel_region = false;
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);
}

/// Combines a run seed with an identifier (pipeline id, tree index, ...).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) { return seed ^ salt; }

}  // namespace autoen
