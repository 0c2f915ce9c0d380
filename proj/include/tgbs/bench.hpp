#pragma once

// Timing harness for the two exponential costs: the Torontonian in the
// number of clicked modes and the exact sampler in the number of clicks.

#include <cstdint>
#include <string>
#include <vector>

namespace tgbs {

struct BenchRow {
  int size = 0;
  double median_seconds = 0.0;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;
  int repeats = 0;
};

struct BenchResult {
  std::string kind;
  std::vector<BenchRow> rows;
  /// 2^slope of the least-squares line through log2(median seconds).
  double doubling_factor = 0.0;
  /// Sizes below this were left out of the fit.
  int fit_from = 0;

  /// Header "size,median_seconds,mean_seconds,std_seconds,repeats".
  std::string csv() const;
};

/// Medians of `repeats` timed runs after one warmup; the fit skips the two
/// smallest sizes when at least four are measured.
BenchResult bench_torontonian(int min_modes, int max_modes, std::uint64_t seed, int repeats = 5, int threads = 1);

/// Time of one exact sample path with k forced clicks, k in [min, max], on
/// a state of max_clicks + trailing modes. The clicks come just before the
/// last `trailing` measured modes, which then carry 2^k branches each.
BenchResult bench_sampler(int min_clicks, int max_clicks, std::uint64_t seed, int repeats = 5, int trailing = 8);

}  // namespace tgbs
