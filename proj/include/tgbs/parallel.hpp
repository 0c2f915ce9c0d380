#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace tgbs {

/// Streaming pairwise summation. Terms are combined along a fixed binary
/// tree determined only by their order, so the result does not depend on
/// how the caller partitions work.
template <typename T>
class PairwiseSum {
 public:
  explicit PairwiseSum(T zero = T{}) : zero_(std::move(zero)) {}

  void add(T value) {
    int level = 0;
    while (!stack_.empty() && stack_.back().second == level) {
      value = stack_.back().first + value;
      stack_.pop_back();
      ++level;
    }
    stack_.emplace_back(std::move(value), level);
  }

  T result() const {
    if (stack_.empty()) return zero_;
    T total = stack_.back().first;
    for (auto it = std::next(stack_.rbegin()); it != stack_.rend(); ++it) total = it->first + total;
    return total;
  }

 private:
  T zero_;
  std::vector<std::pair<T, int>> stack_;
};

/// Runs fn(chunk) for chunk in [0, chunks) on up to `threads` workers.
/// Exceptions are collected per chunk; the one from the lowest chunk index
/// is rethrown so error reports are independent of scheduling.
template <typename Fn>
void parallel_for(std::int64_t chunks, int threads, Fn&& fn) {
  if (chunks <= 0) return;
  const int workers = static_cast<int>(std::clamp<std::int64_t>(threads, 1, chunks));
  if (workers == 1) {
    for (std::int64_t c = 0; c < chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chunks));
  auto worker = [&] {
    for (std::int64_t c = next++; c < chunks; c = next++) {
      try {
        fn(c);
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace tgbs
