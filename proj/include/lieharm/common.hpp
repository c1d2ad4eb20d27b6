#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lieharm {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that does not match the shape an operation expects (lengths, dims).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An operation was asked to work on a system outside its supported class.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Malformed external input (system text, coefficient files).
class InputError : public Error {
 public:
  using Error::Error;
};

namespace tol {
// |z| <= kZero * (1 + max entry) counts as zero in float mode.
inline constexpr double kZero = 1e-12;
// Residual threshold for consistency / image-membership checks.
inline constexpr double kResidual = 1e-8;
}  // namespace tol

// Worker count from LIEHARM_THREADS (0 or unset = hardware concurrency).
inline unsigned worker_count() {
  unsigned n = 0;
  if (const char* env = std::getenv("LIEHARM_THREADS")) {
    try {
      n = static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      n = 0;
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

// Runs fn(i) for i in [0, count) over a static partition. Results must be
// written to per-index slots; the first exception (by index) is rethrown.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace lieharm
