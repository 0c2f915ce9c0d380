#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "test_support.hpp"

#include "tgbs/cv.hpp"

using namespace tgbs;
using testing::integrate_panels;
using testing::ks_statistic;

namespace {

QuadratureState tmsv(double r) {
  const std::vector<double> sq{r, -r};
  ComplexMatrix U(2, 2);
  U << 1, 1, 1, -1;
  return apply_interferometer(squeezed_state(sq), ComplexUnitary(U / std::numbers::sqrt2));
}

double gauss(double x, double var) { return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var); }

GaussianMixture heralded_photon(double r) {
  const std::vector<int> idler{2};
  return herald(tmsv(r), idler, {true}).mixture;
}

}  // namespace

TEST_CASE("vacuum heterodyne outcomes pass a KS test") {
  const GaussianMixture vac(vacuum_state(1));
  const auto density = outcome_density(vac, 1, GaussianPOVM::heterodyne());
  Rng rng(21);
  const int n = 20000;
  std::vector<double> xs;
  std::vector<double> ps;
  for (int i = 0; i < n; ++i) {
    const auto r = sample_outcome(density, rng);
    xs.push_back(r(0));
    ps.push_back(r(1));
  }
  // Var x = Var p = 2 for vacuum plus the heterodyne noise.
  const auto cdf = [](double t) { return testing::normal_cdf(t / std::numbers::sqrt2); };
  const double critical = 1.63 / std::sqrt(static_cast<double>(n));  // 1% level
  CHECK(ks_statistic(xs, cdf) < critical);
  CHECK(ks_statistic(ps, cdf) < critical);
}

TEST_CASE("outcome moments of simple states") {
  const double r = 0.4;
  const std::vector<double> sq{r};
  const auto hom = outcome_density(GaussianMixture(squeezed_state(sq)), 1, GaussianPOVM::homodyne());
  CHECK(hom.components().front().covariance(0, 0) == doctest::Approx(std::exp(2 * r) + 1e-6).epsilon(1e-14));

  const std::vector<Complex> beta{Complex(0.5, -0.25)};
  const auto het = outcome_density(GaussianMixture(coherent_state(beta)), 1, GaussianPOVM::heterodyne());
  Rng rng(22);
  const int n = 20000;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (int i = 0; i < n; ++i) mean += sample_outcome(het, rng);
  mean /= n;
  // r = 2 (Re beta, Im beta); each coordinate has variance 2.
  const double se = std::sqrt(2.0 / n);
  CHECK(std::abs(mean(0) - 1.0) < 4 * se);
  CHECK(std::abs(mean(1) + 0.5) < 4 * se);
}

TEST_CASE("heralded single photon has a normalized bimodal homodyne density") {
  const double r = 0.3;
  const double s = kDefaultHomodyneSqueezing;
  const auto density = outcome_density(heralded_photon(r), 1, GaussianPOVM::homodyne(s));
  CHECK(density.components().size() == 2);
  CHECK(density.min_probe_value() >= -kNegativityTolerance);

  // Thermal signal minus its vacuum part, renormalized.
  const double sech2 = 1.0 / std::pow(std::cosh(r), 2);
  const auto expected = [&](double x) {
    return (gauss(x, std::cosh(2 * r) + 1 / (s * s)) - sech2 * gauss(x, 1 + 1 / (s * s))) / (1 - sech2);
  };
  for (double x : {-3.0, -1.2, 0.0, 0.4, 2.5}) CHECK(density.marginal_x(x) == doctest::Approx(expected(x)).epsilon(1e-12));
  CHECK(density.marginal_x(0.0) < density.marginal_x(1.0));
  CHECK(density.marginal_x(0.0) < density.marginal_x(-1.0));

  const double total = integrate_panels([&](double x) { return density.marginal_x(x); }, -40.0, 40.0, 1e-12);
  CHECK(std::abs(total - 1.0) < 1e-9);

  // The x marginal is the p-integral of the two-dimensional density.
  for (double x : {0.0, 1.1}) {
    const double slice =
        integrate_panels([&](double p) { return density(Eigen::Vector2d(x, p)); }, -12.0 * s, 12.0 * s, 1e-14, 64);
    CHECK(slice == doctest::Approx(density.marginal_x(x)).epsilon(1e-9));
  }
}

TEST_CASE("heterodyne density integrates to one in the plane") {
  const auto density = outcome_density(heralded_photon(0.5), 1, GaussianPOVM::heterodyne());
  const auto inner = [&](double x) {
    return integrate_panels([&](double p) { return density(Eigen::Vector2d(x, p)); }, -15.0, 15.0, 1e-13, 8);
  };
  CHECK(std::abs(integrate_panels(inner, -15.0, 15.0, 1e-11, 8) - 1.0) < 1e-9);
  CHECK(density.min_probe_value() >= -kNegativityTolerance);
}

TEST_CASE("homodyne on one half of a TMSV steers the other") {
  const double r = 0.6;
  const auto state = GaussianMixture(tmsv(r));
  const auto slope = [&](double s) {
    const auto result = backaction(state, 1, GaussianPOVM::homodyne(s), Eigen::Vector2d(1.0, 0.0));
    return result.mixture.branches().front().state.means()(0);
  };
  CHECK(std::abs(slope(1e3) - std::tanh(2 * r)) < 1e-6);
  const auto result = backaction(state, 1, GaussianPOVM::homodyne(), Eigen::Vector2d(0.7, 0.0));
  const auto& after = result.mixture.branches().front().state;
  CHECK(after.means()(0) == doctest::Approx(0.7 * std::tanh(2 * r)).epsilon(1e-5));
  CHECK(after.covariance()(0, 0) == doctest::Approx(1.0 / std::cosh(2 * r)).epsilon(1e-5));
  CHECK(result.mixture.labels() == std::vector<int>{2});

  // The finite-s error falls as 1/s^2.
  const double e10 = std::abs(slope(10.0) - std::tanh(2 * r));
  const double e100 = std::abs(slope(100.0) - std::tanh(2 * r));
  CHECK(e10 / e100 == doctest::Approx(100.0).epsilon(0.01));
}

TEST_CASE("backaction keeps mixtures normalized") {
  Rng rng(23);
  const auto state = random_state(3, rng, {0.8, 0.2});
  const std::vector<int> heralds{3};
  auto mixture = herald(state, heralds, {true}).mixture;
  const auto povm = GaussianPOVM::heterodyne();
  const auto density = outcome_density(mixture, 2, povm);
  const Eigen::Vector2d outcome = sample_outcome(density, rng);
  const auto result = backaction(mixture, 2, povm, outcome);
  CHECK(result.density == doctest::Approx(density(outcome)).epsilon(1e-12));
  CHECK(std::abs(result.mixture.weight_sum() - 1.0) < 1e-9);
  CHECK(result.mixture.valid());
  CHECK(result.mixture.size() == 2);
}

TEST_CASE("negative mixtures are rejected") {
  std::vector<DensityComponent> bad{{2.0, 3.0 * Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()},
                                    {-1.0, Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()}};
  CHECK_THROWS_AS(OutcomeDensity{bad}, NumericalError);
  std::vector<DensityComponent> unnormalized{{0.5, Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()}};
  CHECK_THROWS_AS(OutcomeDensity{unnormalized}, NumericalError);
}

TEST_CASE("pipelines") {
  Rng rng(24);
  const auto state = random_state(3, rng, {1.0, 0.2});

  PipelineConfig a;
  a.state = state;
  a.shots = 50;
  a.seed = 5;
  const auto plain = simulate_pipeline(a);
  const auto reference = sample_batch(state, 50, 5);
  for (std::size_t i = 0; i < 50; ++i) CHECK(plain.records[i].pattern == reference[i].pattern);

  PipelineConfig b;
  b.pipeline = Pipeline::kHeraldThreshold;
  b.state = tmsv(0.7);
  b.herald_modes = {2};
  b.herald_clicks = {true};
  b.shots = 30;
  for (const auto& rec : simulate_pipeline(b).records) CHECK(rec.pattern.clicked() == std::vector<int>{1, 2});

  PipelineConfig c = b;
  c.pipeline = Pipeline::kHeraldHomodyne;
  c.measured_modes = {1};
  c.threads = 1;
  const auto hom = simulate_pipeline(c);
  c.threads = 4;
  const auto hom4 = simulate_pipeline(c);
  CHECK(hom.herald_probability == doctest::Approx(1 - 1 / std::pow(std::cosh(0.7), 2)).epsilon(1e-12));
  CHECK(hom.branches == 2);
  for (std::size_t i = 0; i < hom.records.size(); ++i) {
    CHECK(hom.records[i].cv.size() == 1);
    CHECK(hom.records[i].cv[0].povm == "hom");
    CHECK(hom.records[i].cv[0].outcome == hom4.records[i].cv[0].outcome);
  }

  PipelineConfig d = a;
  d.pipeline = Pipeline::kHeraldHeterodyne;
  d.herald_modes = {3};
  d.herald_clicks = {true};
  ComplexMatrix swap(2, 2);
  swap << 0, 1, 1, 0;
  d.unitary = ComplexUnitary(swap);
  d.measured_modes = {2, 1};
  const auto het = simulate_pipeline(d);
  CHECK(het.records.front().cv.size() == 2);
  CHECK(het.records.front().cv[0].mode == 2);

  PipelineConfig bad = a;
  bad.herald_modes = {1};
  bad.herald_clicks = {true};
  CHECK_THROWS_AS(simulate_pipeline(bad), std::invalid_argument);
}
