#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <vector>

namespace triad {

/// Splits [0, rows) into contiguous blocks and runs `fn(begin, end)` on up to
/// `workers` threads. Blocks never overlap, so per-row work that writes only its
/// own rows yields the same bytes for any worker count.
template <typename Fn>
void parallel_rows(int rows, int workers, Fn&& fn) {
  workers = std::clamp(workers, 1, std::max(rows, 1));
  if (workers == 1) {
    fn(0, rows);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  threads.reserve(workers);
  const int chunk = (rows + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(rows, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Neumaier-compensated running sum; order-dependent, so callers feed it in a
/// fixed order to get reproducible totals.
class CompensatedSum {
 public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace triad
