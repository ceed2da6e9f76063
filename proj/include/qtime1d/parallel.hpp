#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "qtime1d/errors.hpp"

namespace qtime1d {

namespace detail {
inline std::atomic<int>& thread_override() {
  static std::atomic<int> n{0};
  return n;
}
}  // namespace detail

/// Set the worker count used by parallel_map; 0 restores the default
/// (QTIME1D_THREADS, else hardware concurrency).
inline void set_thread_count(int n) {
  if (n < 0) throw config_error("thread count must be >= 0");
  detail::thread_override() = n;
}

inline int thread_count() {
  if (int n = detail::thread_override(); n > 0) return n;
  if (const char* env = std::getenv("QTIME1D_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw config_error(std::string("QTIME1D_THREADS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// out[i] = f(i) for i < n. Elements are computed independently, so the result does not
/// depend on the number of workers. The first exception thrown by any element is rethrown.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, F&& f) {
  std::vector<R> out(n);
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!err) err = std::current_exception();
        next = n;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace qtime1d
