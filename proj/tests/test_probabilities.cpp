#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "test_support.hpp"
#include "tgbs/hafnian.hpp"
#include "tgbs/probabilities.hpp"

using namespace tgbs;

namespace {

QuadratureState tmsv(double r) {
  const std::vector<double> sq{r, -r};
  ComplexMatrix U(2, 2);
  U << 1, 1, 1, -1;
  return apply_interferometer(squeezed_state(sq), ComplexUnitary(U / std::numbers::sqrt2));
}

QuadratureState squeezed(double r) {
  const std::vector<double> sq{r};
  return squeezed_state(sq);
}

}  // namespace

TEST_CASE("closed-form click probabilities") {
  CHECK(threshold_prob(vacuum_state(2), ClickPattern(2, {})) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(threshold_prob(vacuum_state(2), ClickPattern(2, {1})) == doctest::Approx(0.0));

  const double expected = 1.0 - 1.0 / std::cosh(1.0);
  CHECK(std::abs(threshold_prob(squeezed(1.0), ClickPattern(1, {1})) - expected) < 1e-12);
  CHECK(std::abs(threshold_prob_oracle(squeezed(1.0), ClickPattern(1, {1})) - expected) < 1e-12);
  CHECK(expected == doctest::Approx(0.35194573).epsilon(1e-8));

  const double r = 0.8, sech2 = 1.0 / (std::cosh(r) * std::cosh(r));
  const auto pair = tmsv(r);
  CHECK(std::abs(threshold_prob(pair, ClickPattern(2, {1}))) < 1e-12);
  CHECK(std::abs(threshold_prob(pair, ClickPattern(2, {2}))) < 1e-12);
  CHECK(threshold_prob(pair, ClickPattern(2, {})) == doctest::Approx(sech2).epsilon(1e-12));
  CHECK(threshold_prob(pair, ClickPattern(2, {1, 2})) == doctest::Approx(1.0 - sech2).epsilon(1e-12));
}

TEST_CASE("threshold_prob agrees with the vacuum-overlap oracles") {
  Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    const int l = 1 + trial % 6;
    const auto state = random_state(l, rng, {1.0, 0.3});
    const ProbabilityModel model(state);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << l); ++mask) {
      const auto pattern = ClickPattern::from_mask(l, mask);
      const double p = model.threshold_prob(pattern);
      CHECK(std::abs(p - threshold_prob_oracle(state, pattern)) < 1e-10);
      CHECK(std::abs(p - tgbs::testing::threshold_prob_vacuum_overlap(model.sigma().matrix(), pattern.clicked())) <
            1e-10);
    }
  }
}

TEST_CASE("distribution is normalized, sorted and thread independent") {
  Rng rng(102);
  for (int l : {3, 5, 8}) {
    const auto state = random_state(l, rng, {1.0, 0.3});
    const auto dist = distribution(state);
    CHECK(std::abs(dist.normalization_defect) < 1e-9);
    CHECK(dist.table.size() == (std::size_t{1} << l));
    CHECK(dist.table.front().first.empty());
    for (const auto& [pattern, p] : dist.table) CHECK(p >= 0.0);
    const auto again = distribution(state, 3);
    for (std::size_t i = 0; i < dist.table.size(); ++i) CHECK(again.table[i].second == dist.table[i].second);
  }
  const auto vac = distribution(vacuum_state(3));
  CHECK(vac.probability(ClickPattern(3, {})) == doctest::Approx(1.0));
  CHECK(vac.table[1].first == ClickPattern(3, {1}));
  CHECK(vac.table[2].first == ClickPattern(3, {1, 2}));

  const auto pair = distribution(tmsv(0.5));
  for (const auto& [pattern, p] : pair.table)
    if (pattern.size() == 1) CHECK(std::abs(p) < 1e-12);
}

TEST_CASE("photon-number probabilities") {
  CHECK(pnr_prob(vacuum_state(2), PNRPattern({0, 0})) == doctest::Approx(1.0));
  for (double r : {0.3, 1.0}) {
    const double t = std::tanh(r), c = std::cosh(r);
    CHECK(std::abs(pnr_prob(squeezed(r), PNRPattern({1}))) < 1e-14);
    CHECK(pnr_prob(squeezed(r), PNRPattern({2})) == doctest::Approx(t * t / (2 * c)).epsilon(1e-12));
    CHECK(pnr_prob(squeezed(r), PNRPattern({4})) == doctest::Approx(0.375 * std::pow(t, 4) / c).epsilon(1e-12));
  }
  // TMSV: P(n, n) = tanh^{2n} r / cosh^2 r.
  const double r = 0.6, t = std::tanh(r), c = std::cosh(r);
  CHECK(pnr_prob(tmsv(r), PNRPattern({3, 3})) == doctest::Approx(std::pow(t, 6) / (c * c)).epsilon(1e-11));
  CHECK(std::abs(pnr_prob(tmsv(r), PNRPattern({3, 2}))) < 1e-13);

  // Odd totals vanish for pure zero-mean squeezed inputs after mixing.
  Rng rng(103);
  const auto state = random_state(3, rng, {1.0, 0.0});
  CHECK(std::abs(pnr_prob(state, PNRPattern({1, 0, 2}))) < 1e-12);
  CHECK(pnr_prob(state, PNRPattern({1, 1, 0})) > 0.0);
}

TEST_CASE("photon-number probabilities are normalized with the right moments") {
  Rng rng(104);
  const auto state = random_state(2, rng, {0.4, 0.2});
  const ProbabilityModel model(state);
  double mass = 0.0, mean = 0.0, second = 0.0;
  for (int a = 0; a <= 24; ++a)
    for (int b = 0; a + b <= 24; ++b) {
      const double p = model.pnr_prob(PNRPattern({a, b}));
      mass += p;
      mean += (a + b) * p;
      second += (a + b) * (a + b) * p;
    }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  const auto m = photon_number_moments(state);
  CHECK(m.mean == doctest::Approx(mean).epsilon(1e-7));
  CHECK(m.second_moment == doctest::Approx(second).epsilon(1e-6));
}

TEST_CASE("threshold probability dominates the collision-free PNR probability") {
  Rng rng(105);
  for (int trial = 0; trial < 10; ++trial) {
    const auto state = random_state(4, rng, {1.0, 0.3});
    const ProbabilityModel model(state);
    for (std::uint64_t mask = 0; mask < 16; ++mask) {
      const auto pattern = ClickPattern::from_mask(4, mask);
      CHECK(model.threshold_prob(pattern) >= model.pnr_prob(PNRPattern::from_clicks(pattern)) - 1e-10);
    }
  }
}

TEST_CASE("Torontonian as a sum of hafnians") {
  // Lowest order is the single hafnian Haf(X O_(S)).
  Rng rng(106);
  const auto state = random_state(4, rng, {0.8, 0.2});
  const ClickPattern S(4, {1, 3, 4});
  const auto lowest = tor_as_hafnian_sum(state, S, 3);
  const ComplexMatrix O = kernel_matrix(husimi_covariance(state)).matrix();
  const ComplexMatrix sub = reduce(O, S);
  const Complex haf = hafnian_naive(ComplexMatrix(block_swap(3) * sub));
  CHECK(lowest.partial_sums[3] == doctest::Approx(haf.real()).epsilon(1e-10));

  const auto full = tor_as_hafnian_sum(state, S, 12);
  for (std::size_t n = 1; n < full.partial_sums.size(); ++n)
    CHECK(full.partial_sums[n] >= full.partial_sums[n - 1] - 1e-14);
  CHECK(full.residual >= -1e-12);
  CHECK(full.residual < lowest.residual);

  // Single squeezed mode: Haf / (2m)! = tanh^{2m} r (2m)! / (4^m m!^2).
  const double r = 0.9, t2 = std::tanh(r) * std::tanh(r);
  const auto single = tor_as_hafnian_sum(squeezed(r), ClickPattern(1, {1}), 20);
  double series = 0.0, term = 1.0;
  for (int m = 1; m <= 10; ++m) {
    term *= t2 * (2 * m - 1.0) / (2 * m);
    series += term;
    CHECK(single.partial_sums[2 * m] == doctest::Approx(series).epsilon(1e-11));
  }
  CHECK(single.torontonian == doctest::Approx(std::cosh(r) - 1.0).epsilon(1e-12));

  // TMSV: remaining mass sum_{n > 4} tanh^{2n} r.
  const double rt = 0.5, tt = std::tanh(rt);
  const auto pair = tor_as_hafnian_sum(tmsv(rt), ClickPattern(2, {1, 2}), 8);
  CHECK(pair.residual <= 10 * std::pow(tt, 10));
  CHECK(pair.residual == doctest::Approx(std::pow(tt, 10) / (1 - tt * tt)).epsilon(1e-8));
}

TEST_CASE("collision probability") {
  CHECK(collision_probability(vacuum_state(3)).epsilon < 1e-14);
  CHECK(collision_probability(squeezed(1.0)).epsilon == doctest::Approx(1.0 - 1.0 / std::cosh(1.0)).epsilon(1e-12));

  const std::vector<double> weak{0.1, 0.1, 0.1, 0.1};
  Rng rng(107);
  const auto mixed = apply_interferometer(squeezed_state(weak), haar_unitary(4, rng));
  const auto report = collision_probability(mixed, 10);
  CHECK(report.epsilon < 1e-2);
  REQUIRE(report.cutoff_check);
  // Patterns above the cutoff are all collisions and the threshold
  // distribution puts nothing there, so half their mass is missing.
  CHECK(std::abs(report.cutoff_check->total_variation - report.epsilon) <= 0.5 * report.cutoff_check->tail + 1e-12);
  for (const auto& [pattern, gap] : report.gaps) CHECK(gap >= -1e-10);
  CHECK(report.bound == doctest::Approx(8.0 * report.moments.second_moment / 4));

  const auto strong = random_state(3, rng, {0.8, 0.2});
  const auto check = collision_probability(strong, 16);
  CHECK(std::abs(check.cutoff_check->total_variation - (check.epsilon - 0.5 * check.cutoff_check->tail)) < 1e-9);
}

TEST_CASE("photon moments of squeezed vacua") {
  const std::vector<double> zero{0.0, 0.0};
  const auto none = photon_moments(zero, 4);
  CHECK(none.mean == 0.0);
  CHECK(none.second_moment == 0.0);

  const std::vector<double> one{1.0};
  const double s2 = std::sinh(1.0) * std::sinh(1.0);
  CHECK(photon_moments(one, 200).mean == doctest::Approx(s2).epsilon(1e-10));
  CHECK(s2 == doctest::Approx(1.3811).epsilon(1e-4));

  const std::vector<double> two{1.0, 0.5};
  const auto m = photon_moments(two, 300);
  const double mean = s2 + std::sinh(0.5) * std::sinh(0.5);
  const double var = std::pow(std::sinh(2.0), 2) / 2 + std::pow(std::sinh(1.0), 2) / 2;
  CHECK(m.mean == doctest::Approx(mean).epsilon(1e-10));
  CHECK(m.second_moment == doctest::Approx(mean * mean + var).epsilon(1e-10));
  const auto closed = photon_number_moments(squeezed_state(two));
  CHECK(closed.second_moment == doctest::Approx(m.second_moment).epsilon(1e-10));

  CHECK_THROWS_AS(photon_moments(one, 10), NumericalError);
}

TEST_CASE("Haar collision experiment") {
  const std::vector<double> zero(3, 0.0);
  const auto flat = haar_collision_experiment(3, zero, 30, 1);
  CHECK(flat.mean < 1e-14);
  CHECK(flat.bound == 0.0);
  CHECK(flat.below_bound);

  const std::vector<double> sq{0.3, 0.3, 0.0};
  const auto a = haar_collision_experiment(3, sq, 30, 42, 1);
  const auto b = haar_collision_experiment(3, sq, 30, 42, 3);
  CHECK(a.epsilons == b.epsilons);
  CHECK(a.below_bound);
  CHECK(a.mean > 0.0);
  CHECK_THROWS(haar_collision_experiment(3, sq, 10, 42));
}
