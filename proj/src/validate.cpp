#include "tgbs/validate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tgbs/hafnian.hpp"
#include "tgbs/probabilities.hpp"
#include "tgbs/sampler.hpp"
#include "tgbs/torontonian.hpp"

namespace tgbs {

namespace {

// Upper 0.1% point of the standard normal, for the chi-square cut.
constexpr double kChiSquareZ = 3.090232306167813;

ComplexMatrix random_symmetric(int dim, Rng& rng) {
  ComplexMatrix A(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j <= i; ++j) A(i, j) = A(j, i) = Complex(rng.normal(), rng.normal()) / std::numbers::sqrt2;
  return A;
}

HafnianConvention convention_for(Injection inject) {
  HafnianConvention c = kHafnianConvention;
  if (inject == Injection::kHafArrangement) c.arrangement = HafnianArrangement::kUnswapped;
  return c;
}

CheckResult naive_hafnian(const ValidationOptions& opt, Rng& rng) {
  CheckResult r{"naive_hafnian", true, 0.0, 1e-8, 0};
  const auto convention = convention_for(opt.inject);
  for (int dim = 2; dim <= 8; dim += 2)
    for (int i = 0; i < opt.cases; ++i) {
      const ComplexMatrix A = random_symmetric(dim, rng);
      const Complex exact = hafnian_naive(A);
      const double err = std::abs(hafnian_powerset(A, convention) - exact) / std::max(std::abs(exact), 1e-300);
      r.residual = std::max(r.residual, err);
      ++r.cases;
    }
  return r;
}

CheckResult diagonal_sensitivity(const ValidationOptions& opt, Rng& rng) {
  CheckResult r{"diagonal_sensitivity", true, 0.0, 1e-10, 0};
  const auto convention = convention_for(opt.inject);
  for (int dim = 4; dim <= 8; dim += 2)
    for (int i = 0; i < opt.cases; ++i) {
      ComplexMatrix A = random_symmetric(dim, rng);
      const Complex before = hafnian_powerset(A, convention);
      for (int k = 0; k < dim; ++k) A(k, k) = Complex(rng.normal(), rng.normal());
      const Complex after = hafnian_powerset(A, convention);
      r.residual = std::max(r.residual, std::abs(after - before) / std::max(std::abs(before), 1e-300));
      ++r.cases;
    }
  return r;
}

CheckResult threshold_oracle(const ValidationOptions& opt, Rng& rng) {
  CheckResult r{"threshold_oracle", true, 0.0, 1e-10, 0};
  const TorontonianSign sign =
      opt.inject == Injection::kTorSign ? TorontonianSign::kSubsetParity : TorontonianSign::kComplementParity;
  for (int l = 1; l <= 4; ++l)
    for (int i = 0; i < opt.cases; ++i) {
      const auto state = random_state(l, rng, {1.0, 0.3});
      const auto sigma = husimi_covariance(state);
      const auto O = kernel_matrix(sigma);
      const double root = std::sqrt(sigma.determinant());
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << l); ++mask) {
        const auto pattern = ClickPattern::from_mask(l, mask);
        const ComplexMatrix OS = reduce(O.matrix(), pattern);
        const double p = torontonian<double>(OS, {1, sign}).value / root;
        r.residual = std::max(r.residual, std::abs(p - threshold_prob_oracle(state, pattern)));
        ++r.cases;
      }
    }
  return r;
}

CheckResult torontonian_bridge(const ValidationOptions& opt, Rng& rng) {
  CheckResult r{"torontonian_bridge", true, 0.0, 1e-7, 0};
  for (int l = 2; l <= 5; ++l)
    for (int i = 0; i < opt.cases; ++i) {
      const auto O = kernel_matrix(husimi_covariance(random_state(l, rng, {1.0, 0.3})));
      const ComplexMatrix XO = block_swap(l).cast<Complex>() * O.matrix();
      const double exact = hafnian_naive(XO).real();
      const double err = std::abs(hafnian_from_torontonian(O) - exact) / std::max(std::abs(exact), 1e-12);
      r.residual = std::max(r.residual, err);
      ++r.cases;
    }
  return r;
}

CheckResult torhaf_convergence(const ValidationOptions& opt, Rng& rng) {
  CheckResult r{"torhaf_convergence", true, 0.0, 1e-6, 0};
  for (int l = 1; l <= 3; ++l)
    for (int i = 0; i < opt.cases; ++i) {
      // At r = 0.8 the photon tail beyond 12 is ~1e-3; r <= 0.35 keeps it well below 1e-6.
      const auto state = random_state(l, rng, {0.35, 0.0});
      const auto all = ClickPattern::from_mask(l, (std::uint64_t{1} << l) - 1);
      const auto sum = tor_as_hafnian_sum(state, all, 12);
      for (std::size_t n = 1; n < sum.partial_sums.size(); ++n)
        if (sum.partial_sums[n] < sum.partial_sums[n - 1] - 1e-14) r.passed = false;
      r.residual = std::max(r.residual, std::abs(sum.residual));
      ++r.cases;
    }
  return r;
}

CheckResult collision_identity(const ValidationOptions& opt, Rng& rng) {
  CheckResult r{"collision_identity", true, 0.0, 0.0, 0};
  for (int l = 1; l <= 4; ++l)
    for (int i = 0; i < std::max(1, opt.cases / 2); ++i) {
      const auto state = random_state(l, rng, {0.5, 0.0});
      const auto report = collision_probability(state, 14, opt.threads);
      const auto& check = *report.cutoff_check;
      // The truncated l1 sum can only miss the tail mass.
      const double excess = std::abs(check.total_variation - report.epsilon) - check.tail;
      r.residual = std::max(r.residual, excess);
      ++r.cases;
    }
  r.tolerance = 1e-10;
  return r;
}

CheckResult normalization(const ValidationOptions& opt, Rng& rng) {
  CheckResult r{"normalization", true, 0.0, 1e-9, 0};
  for (int i = 0; i < opt.cases; ++i) {
    const auto dist = distribution(random_state(6, rng, {1.0, 0.3}), opt.threads);
    r.residual = std::max(r.residual, std::abs(dist.normalization_defect));
    ++r.cases;
  }
  return r;
}

// Pearson chi-square of sampled patterns against the enumerated law, with
// bins under five expected counts pooled.
CheckResult sampler_chi_square(const ValidationOptions& opt, Rng& rng) {
  CheckResult r{"sampler_chi_square", true, 0.0, 0.0, 0};
  const auto state = random_state(3, rng, {1.0, 0.2});
  const auto exact = distribution(state).by_mask();
  const auto records = sample_batch(state, static_cast<std::size_t>(opt.samples), rng.bits(), opt.threads);
  std::vector<double> counts(exact.size(), 0.0);
  for (const auto& rec : records) counts[rec.pattern.mask()] += 1.0;
  const double n = static_cast<double>(opt.samples);
  double chi2 = 0.0;
  double pooled_expected = 0.0;
  double pooled_observed = 0.0;
  int bins = 0;
  for (std::size_t k = 0; k < exact.size(); ++k) {
    const double e = n * exact[k];
    if (e < 5.0) {
      pooled_expected += e;
      pooled_observed += counts[k];
      continue;
    }
    chi2 += (counts[k] - e) * (counts[k] - e) / e;
    ++bins;
  }
  if (pooled_expected >= 5.0) {
    chi2 += (pooled_observed - pooled_expected) * (pooled_observed - pooled_expected) / pooled_expected;
    ++bins;
  }
  const double dof = std::max(1, bins - 1);
  // Wilson-Hilferty approximation of the 99.9% quantile.
  const double h = 2.0 / (9.0 * dof);
  r.tolerance = dof * std::pow(1.0 - h + kChiSquareZ * std::sqrt(h), 3);
  r.residual = chi2;
  r.cases = opt.samples;
  return r;
}

}  // namespace

bool ValidationSummary::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

ValidationSummary run_validation(const ValidationOptions& options) {
  if (options.cases < 1 || options.samples < 1) throw std::invalid_argument("validate: counts must be positive");
  using Check = CheckResult (*)(const ValidationOptions&, Rng&);
  const Check checks[] = {naive_hafnian,      diagonal_sensitivity, threshold_oracle,   torontonian_bridge,
                          torhaf_convergence, collision_identity,   normalization,      sampler_chi_square};
  ValidationSummary summary;
  std::uint64_t index = 0;
  for (Check check : checks) {
    Rng rng = Rng::substream(options.seed, index++);
    CheckResult result = check(options, rng);
    result.passed = result.passed && result.residual <= result.tolerance;
    summary.checks.push_back(std::move(result));
  }
  return summary;
}

}  // namespace tgbs
