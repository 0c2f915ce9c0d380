#include "tgbs/probabilities.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tgbs/hafnian.hpp"
#include "tgbs/log.hpp"
#include "tgbs/parallel.hpp"
#include "tgbs/torontonian.hpp"

namespace tgbs {

namespace {

constexpr double kImaginaryTolerance = 1e-8;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

bool lexicographic_less(const ClickPattern& a, const ClickPattern& b) {
  return std::lexicographical_compare(a.clicked().begin(), a.clicked().end(), b.clicked().begin(), b.clicked().end());
}

void require_zero_mean(const QuadratureState& state, const char* who) {
  if (!state.zero_mean()) throw std::invalid_argument(std::string(who) + ": state must have zero mean");
}

void require_same_modes(const QuadratureState& state, int pattern_modes, const char* who) {
  if (pattern_modes != state.modes())
    throw std::invalid_argument(std::string(who) + ": pattern and state have different mode counts");
}

// Truncated law of the total photon number of a squeezed-vacuum product.
PhotonMoments squeezed_photon_law(std::span<const double> squeezing, int cutoff) {
  std::vector<double> total(cutoff + 1, 0.0);
  total[0] = 1.0;
  double tail = 0.0;
  for (double r : squeezing) {
    std::vector<double> single(cutoff + 1, 0.0);
    const double t2 = std::tanh(r) * std::tanh(r);
    single[0] = 1.0 / std::cosh(r);
    double mass = single[0];
    for (int n = 2; n <= cutoff; n += 2) {
      single[n] = single[n - 2] * t2 * (n - 1.0) / n;
      mass += single[n];
    }
    tail += std::max(0.0, 1.0 - mass);
    std::vector<double> next(cutoff + 1, 0.0);
    for (int a = 0; a <= cutoff; ++a)
      for (int b = 0; a + b <= cutoff; b += 2) next[a + b] += total[a] * single[b];
    total = std::move(next);
  }
  PhotonMoments m;
  double mass = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    mass += total[n];
    m.mean += n * total[n];
    m.second_moment += static_cast<double>(n) * n * total[n];
  }
  m.tail = std::max(tail, 1.0 - mass);
  m.distribution = std::move(total);
  return m;
}

}  // namespace

double clamp_probability(double p, const char* who) {
  if (!(p >= -kClampTolerance && p <= 1.0 + kClampTolerance))
    throw NumericalError(std::string(who) + ": probability " + std::to_string(p) + " outside [0, 1]");
  if (p < 0.0 || p > 1.0) {
    log_info(std::string(who) + ": clamped probability " + std::to_string(p));
    p = std::clamp(p, 0.0, 1.0);
  }
  return p;
}

ProbabilityModel::ProbabilityModel(const QuadratureState& state)
    : sigma_((require_zero_mean(state, "ProbabilityModel"), require_physical(state), husimi_covariance(state))),
      kernel_(kernel_matrix(sigma_)),
      swapped_(block_swap(kernel_.modes()) * kernel_.matrix()),
      sqrt_det_(std::sqrt(sigma_.determinant())) {}

double ProbabilityModel::torontonian(const ClickPattern& pattern) const {
  if (pattern.modes() != modes()) throw std::invalid_argument("threshold_prob: pattern has wrong mode count");
  const ComplexMatrix sub = reduce(kernel_.matrix(), pattern);
  return tgbs::torontonian<double>(sub).value;
}

double ProbabilityModel::threshold_prob(const ClickPattern& pattern) const {
  return clamp_probability(torontonian(pattern) / sqrt_det_, "threshold_prob");
}

double ProbabilityModel::hafnian(const PNRPattern& pattern) const {
  if (pattern.modes() != modes()) throw std::invalid_argument("pnr_prob: pattern has wrong mode count");
  if (pattern.total() > kPNRMaxPhotons) throw std::invalid_argument("pnr_prob: more than 30 photons");
  // The power-set formula is fastest without repeats; repeated rows make its
  // binomially weighted alternating sum cancel, so those use the matching
  // recursion.
  const Complex h = pattern.has_collision() ? hafnian_multiset<double>(swapped_, pattern.counts())
                                            : hafnian_repeated<double>(swapped_, pattern.counts());
  if (std::abs(h.imag()) > kImaginaryTolerance * std::max(1.0, std::abs(h.real())))
    throw NumericalError("pnr_prob: hafnian has imaginary part " + std::to_string(h.imag()));
  return h.real();
}

double ProbabilityModel::pnr_prob(const PNRPattern& pattern) const {
  double norm = sqrt_det_;
  for (int s : pattern.counts()) norm *= factorial(s);
  return clamp_probability(hafnian(pattern) / norm, "pnr_prob");
}

double threshold_prob(const QuadratureState& state, const ClickPattern& pattern) {
  require_same_modes(state, pattern.modes(), "threshold_prob");
  return ProbabilityModel(state).threshold_prob(pattern);
}

double pnr_prob(const QuadratureState& state, const PNRPattern& pattern) {
  require_same_modes(state, pattern.modes(), "pnr_prob");
  return ProbabilityModel(state).pnr_prob(pattern);
}

double threshold_prob_oracle(const QuadratureState& state, const ClickPattern& pattern) {
  require_zero_mean(state, "threshold_prob_oracle");
  require_same_modes(state, pattern.modes(), "threshold_prob_oracle");
  const HusimiCovariance sigma = husimi_covariance(state);
  const int l = state.modes();
  const std::vector<int>& clicked = pattern.clicked();
  const int n = static_cast<int>(clicked.size());

  PairwiseSum<double> sum;
  for (std::uint64_t z = 0; z < (std::uint64_t{1} << n); ++z) {
    // Vacuum is projected on the unclicked modes and on Z within S.
    std::vector<int> counts(l, 1);
    for (int i = 0; i < n; ++i)
      if (!(z >> i & 1U)) counts[clicked[i] - 1] = 0;
    const ComplexMatrix sub = reduce(sigma.matrix(), std::span<const int>(counts));
    double overlap = 1.0;
    if (sub.rows() > 0) {
      const Eigen::LLT<ComplexMatrix> llt(sub);
      if (llt.info() != Eigen::Success) throw NumericalError("threshold_prob_oracle: Sigma_(T) not positive definite");
      overlap = 1.0 / llt.matrixL().toDenseMatrix().diagonal().real().prod();
    }
    sum.add(std::popcount(z) % 2 ? -overlap : overlap);
  }
  return clamp_probability(sum.result(), "threshold_prob_oracle");
}

HafnianSum tor_as_hafnian_sum(const QuadratureState& state, const ClickPattern& pattern, int cutoff) {
  require_same_modes(state, pattern.modes(), "tor_as_hafnian_sum");
  const int k = static_cast<int>(pattern.size());
  if (k > 6) throw std::invalid_argument("tor_as_hafnian_sum: at most 6 clicked modes");
  if (cutoff < k) throw std::invalid_argument("tor_as_hafnian_sum: cutoff below the number of clicks");
  if (cutoff > kPNRMaxPhotons) throw std::invalid_argument("tor_as_hafnian_sum: cutoff above 30");

  const ProbabilityModel model(state);
  const int l = state.modes();
  std::vector<PairwiseSum<double>> by_total(cutoff + 1);
  // Odometer over s_i >= 1 on the clicked modes with sum s <= cutoff.
  std::vector<int> s(k, 1);
  while (true) {
    std::vector<int> counts(l, 0);
    double norm = 1.0;
    for (int i = 0; i < k; ++i) {
      counts[pattern.clicked()[i] - 1] = s[i];
      norm *= factorial(s[i]);
    }
    by_total[std::accumulate(s.begin(), s.end(), 0)].add(model.hafnian(PNRPattern(counts)) / norm);
    int i = 0;
    while (i < k && std::accumulate(s.begin(), s.end(), 0) >= cutoff) s[i++] = 1;
    if (i == k) break;
    ++s[i];
  }

  HafnianSum result;
  result.partial_sums.assign(cutoff + 1, 0.0);
  double running = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    running += by_total[n].result();
    result.partial_sums[n] = running;
  }
  result.torontonian = model.torontonian(pattern);
  result.residual = result.torontonian - result.partial_sums.back();
  return result;
}

double ThresholdDistribution::probability(const ClickPattern& pattern) const {
  const auto it = std::lower_bound(table.begin(), table.end(), pattern,
                                   [](const auto& entry, const ClickPattern& p) { return lexicographic_less(entry.first, p); });
  if (it == table.end() || !(it->first == pattern)) throw std::invalid_argument("distribution: unknown pattern");
  return it->second;
}

std::vector<double> ThresholdDistribution::by_mask() const {
  std::vector<double> out(std::size_t{1} << modes, 0.0);
  for (const auto& [pattern, p] : table) out[pattern.mask()] = p;
  return out;
}

ThresholdDistribution distribution(const QuadratureState& state, int threads) {
  const int l = state.modes();
  if (l > kDistributionMaxModes) throw std::invalid_argument("distribution: more than 12 modes");
  const ProbabilityModel model(state);
  const std::uint64_t count = std::uint64_t{1} << l;
  std::vector<double> probs(count);
  constexpr std::uint64_t kChunk = 64;
  const std::int64_t chunks = static_cast<std::int64_t>((count + kChunk - 1) / kChunk);
  parallel_for(chunks, threads, [&](std::int64_t c) {
    const std::uint64_t begin = static_cast<std::uint64_t>(c) * kChunk;
    for (std::uint64_t i = begin; i < std::min(count, begin + kChunk); ++i) {
      const std::uint64_t mask = i ^ (i >> 1);  // Gray order
      probs[mask] = model.threshold_prob(ClickPattern::from_mask(l, mask));
    }
  });

  ThresholdDistribution dist;
  dist.modes = l;
  PairwiseSum<double> sum;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    sum.add(probs[mask]);
    dist.table.emplace_back(ClickPattern::from_mask(l, mask), probs[mask]);
  }
  std::sort(dist.table.begin(), dist.table.end(),
            [](const auto& a, const auto& b) { return lexicographic_less(a.first, b.first); });
  dist.normalization_defect = sum.result() - 1.0;
  return dist;
}

PhotonNumberMoments photon_number_moments(const QuadratureState& state) {
  require_zero_mean(state, "photon_number_moments");
  const Matrix& V = state.covariance();
  const double l2 = 2.0 * state.modes();
  PhotonNumberMoments m;
  m.mean = (V.trace() - l2) / 4.0;
  const double variance = ((V * V).trace() - l2) / 8.0;
  m.second_moment = variance + m.mean * m.mean;
  return m;
}

CollisionReport collision_probability(const QuadratureState& state, int photon_cutoff, int threads) {
  const int l = state.modes();
  if (l > kCollisionMaxModes) throw std::invalid_argument("collision_probability: more than 10 modes");
  const ProbabilityModel model(state);
  const std::uint64_t count = std::uint64_t{1} << l;

  std::vector<double> gaps(count);
  parallel_for(static_cast<std::int64_t>(count), threads, [&](std::int64_t m) {
    const auto mask = static_cast<std::uint64_t>(m);
    const ClickPattern pattern = ClickPattern::from_mask(l, mask);
    const double tor = model.torontonian(pattern);
    const double haf = model.hafnian(PNRPattern::from_clicks(pattern));
    gaps[mask] = (tor - haf) / model.sqrt_det_sigma();
    if (gaps[mask] < -kClampTolerance)
      throw NumericalError("collision_probability: negative collision mass for a click pattern");
  });

  CollisionReport report;
  PairwiseSum<double> sum;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    sum.add(gaps[mask]);
    report.gaps.emplace_back(ClickPattern::from_mask(l, mask), gaps[mask]);
  }
  std::sort(report.gaps.begin(), report.gaps.end(),
            [](const auto& a, const auto& b) { return lexicographic_less(a.first, b.first); });
  report.epsilon = clamp_probability(sum.result(), "collision_probability");
  report.moments = photon_number_moments(state);
  report.bound = l == 0 ? 0.0 : 8.0 * report.moments.second_moment / l;

  if (photon_cutoff > 0) {
    if (l > 4) throw std::invalid_argument("collision_probability: cutoff check limited to 4 modes");
    if (photon_cutoff < l) throw std::invalid_argument("collision_probability: cutoff below the mode count");
    PairwiseSum<double> distance, mass;
    std::vector<int> s(l, 0);
    while (true) {
      const PNRPattern pattern(s);
      if (pattern.total() <= photon_cutoff) {
        const double p = model.pnr_prob(pattern);
        mass.add(p);
        if (pattern.has_collision()) {
          distance.add(p);
        } else {
          std::vector<int> clicked;
          for (int k = 0; k < l; ++k)
            if (s[k]) clicked.push_back(k + 1);
          distance.add(std::abs(model.threshold_prob(ClickPattern(l, clicked)) - p));
        }
      }
      int i = 0;
      while (i < l && std::accumulate(s.begin(), s.end(), 0) >= photon_cutoff) s[i++] = 0;
      if (i == l) break;
      ++s[i];
    }
    report.cutoff_check = CutoffCheck{photon_cutoff, 0.5 * distance.result(), std::max(0.0, 1.0 - mass.result())};
  }
  return report;
}

PhotonMoments photon_moments(std::span<const double> squeezing, int cutoff) {
  if (cutoff < 0) throw std::invalid_argument("photon_moments: negative cutoff");
  PhotonMoments m = squeezed_photon_law(squeezing, cutoff);
  if (!(m.tail < kPhotonTailLimit))
    throw NumericalError("photon_moments: cutoff " + std::to_string(cutoff) + " leaves tail mass " +
                         std::to_string(m.tail));
  return m;
}

HaarCollisionResult haar_collision_experiment(int modes, std::span<const double> squeezing, int trials,
                                              std::uint64_t seed, int threads) {
  if (modes < 1 || modes > 8) throw std::invalid_argument("haar_collision_experiment: modes must be 1..8");
  if (trials < 30) throw std::invalid_argument("haar_collision_experiment: at least 30 trials");
  if (static_cast<int>(squeezing.size()) != modes)
    throw std::invalid_argument("haar_collision_experiment: one squeezing value per mode");

  const QuadratureState input = squeezed_state(squeezing);
  HaarCollisionResult result;
  result.epsilons.resize(static_cast<std::size_t>(trials));
  parallel_for(trials, threads, [&](std::int64_t i) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
    const ComplexUnitary U = haar_unitary(modes, rng);
    result.epsilons[static_cast<std::size_t>(i)] = collision_probability(apply_interferometer(input, U)).epsilon;
  });

  PairwiseSum<double> sum;
  for (double e : result.epsilons) sum.add(e);
  result.mean = sum.result() / trials;
  PairwiseSum<double> squares;
  for (double e : result.epsilons) squares.add((e - result.mean) * (e - result.mean));
  result.standard_error = std::sqrt(squares.result() / (trials - 1) / trials);

  int cutoff = 16;
  PhotonMoments law = squeezed_photon_law(squeezing, cutoff);
  while (!(law.tail < kPhotonTailLimit) && cutoff < 4096) law = squeezed_photon_law(squeezing, cutoff *= 2);
  law = photon_moments(squeezing, cutoff);
  result.bound = 8.0 * law.second_moment / modes;
  result.below_bound = result.bound == 0.0 ? result.mean <= 1e-12
                                           : result.mean + 1.645 * result.standard_error < result.bound;
  return result;
}

}  // namespace tgbs
