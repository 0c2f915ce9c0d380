#include "tgbs/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "tgbs/random.hpp"
#include "tgbs/sampler.hpp"
#include "tgbs/torontonian.hpp"

namespace tgbs {

namespace {

double seconds(const std::function<void()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

BenchRow measure(int size, int repeats, const std::function<void()>& fn) {
  fn();
  std::vector<double> times;
  for (int i = 0; i < repeats; ++i) times.push_back(seconds(fn));
  BenchRow row{size, 0.0, 0.0, 0.0, repeats};
  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  row.median_seconds = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  for (double t : times) row.mean_seconds += t / repeats;
  for (double t : times) row.std_seconds += (t - row.mean_seconds) * (t - row.mean_seconds);
  row.std_seconds = repeats > 1 ? std::sqrt(row.std_seconds / (repeats - 1)) : 0.0;
  return row;
}

void fit(BenchResult& result) {
  const std::size_t skip = result.rows.size() >= 4 ? 2 : 0;
  result.fit_from = result.rows.empty() ? 0 : result.rows[skip].size;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = 0;
  for (std::size_t i = skip; i < result.rows.size(); ++i) {
    const double x = result.rows[i].size;
    const double y = std::log2(result.rows[i].median_seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n += 1;
  }
  if (n < 2) return;
  result.doubling_factor = std::exp2((n * sxy - sx * sy) / (n * sxx - sx * sx));
}

void check_range(int lo, int hi, int limit, int repeats, const char* who) {
  if (lo < 1 || hi < lo || hi > limit || repeats < 1)
    throw std::invalid_argument(std::string(who) + ": sizes must satisfy 1 <= min <= max <= " +
                                std::to_string(limit));
}

}  // namespace

std::string BenchResult::csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "size,median_seconds,mean_seconds,std_seconds,repeats\n";
  for (const auto& r : rows)
    out << r.size << ',' << r.median_seconds << ',' << r.mean_seconds << ',' << r.std_seconds << ',' << r.repeats
        << '\n';
  return out.str();
}

BenchResult bench_torontonian(int min_modes, int max_modes, std::uint64_t seed, int repeats, int threads) {
  check_range(min_modes, max_modes, 22, repeats, "bench tor");
  BenchResult result{"tor", {}, 0.0, 0};
  for (int n = min_modes; n <= max_modes; ++n) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(n));
    const auto O = kernel_matrix(husimi_covariance(random_state(n, rng, {1.0, 0.3})));
    volatile double sink = 0.0;
    result.rows.push_back(measure(n, repeats, [&] { sink = torontonian(O, {threads}).value; }));
  }
  fit(result);
  return result;
}

BenchResult bench_sampler(int min_clicks, int max_clicks, std::uint64_t seed, int repeats, int trailing) {
  check_range(min_clicks, max_clicks, 16, repeats, "bench sample");
  if (trailing < 0) throw std::invalid_argument("bench sample: trailing must be nonnegative");
  const int modes = max_clicks + trailing;
  Rng rng = Rng::substream(seed, 0);
  const auto state = random_state(modes, rng, {1.0, 0.0});
  // Measurement order l..1; the k clicks sit at positions [last - k, last)
  // where last = max_clicks, so every size shares the same trailing modes.
  std::vector<int> order;
  for (int m = modes; m >= 1; --m) order.push_back(m);
  BenchResult result{"sample", {}, 0.0, 0};
  for (int k = min_clicks; k <= max_clicks; ++k) {
    std::vector<bool> clicks(order.size(), false);
    for (int i = max_clicks - k; i < max_clicks; ++i) clicks[static_cast<std::size_t>(i)] = true;
    volatile double sink = 0.0;
    result.rows.push_back(measure(k, repeats, [&] { sink = herald(state, order, clicks).probability; }));
  }
  fit(result);
  return result;
}

}  // namespace tgbs
