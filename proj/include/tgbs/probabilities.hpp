#pragma once

// Click and photon-number probabilities of zero-mean Gaussian states, the
// full threshold distribution, and the collision analysis relating the two.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tgbs/gaussian.hpp"
#include "tgbs/random.hpp"

namespace tgbs {

inline constexpr double kClampTolerance = 1e-10;
inline constexpr int kDistributionMaxModes = 12;
inline constexpr int kCollisionMaxModes = 10;
inline constexpr int kPNRMaxPhotons = 30;

/// Accepts p within kClampTolerance of [0, 1], clamping and logging; throws
/// NumericalError beyond that.
double clamp_probability(double p, const char* who);

/// Kernel and sqrt(det Sigma) of a zero-mean state, computed once and
/// shared by many probability evaluations.
class ProbabilityModel {
 public:
  explicit ProbabilityModel(const QuadratureState& state);

  int modes() const { return kernel_.modes(); }
  const HusimiCovariance& sigma() const { return sigma_; }
  const KernelMatrix& kernel() const { return kernel_; }
  double sqrt_det_sigma() const { return sqrt_det_; }

  /// Tor(O_(S)) / sqrt(det Sigma).
  double threshold_prob(const ClickPattern& pattern) const;
  /// Tor(O_(S)) without normalization.
  double torontonian(const ClickPattern& pattern) const;
  /// Haf(X O_(s)) / (sqrt(det Sigma) prod s_k!).
  double pnr_prob(const PNRPattern& pattern) const;
  /// Haf(X O_(s)) without normalization, real part (imaginary part checked).
  double hafnian(const PNRPattern& pattern) const;

 private:
  HusimiCovariance sigma_;
  KernelMatrix kernel_;
  ComplexMatrix swapped_;  // X O
  double sqrt_det_ = 1.0;
};

double threshold_prob(const QuadratureState& state, const ClickPattern& pattern);
double pnr_prob(const QuadratureState& state, const PNRPattern& pattern);

/// Click probability by inclusion-exclusion over vacuum overlaps,
/// P(vacuum on T) = 1 / sqrt(det Sigma_(T)); never forms Sigma^{-1}.
double threshold_prob_oracle(const QuadratureState& state, const ClickPattern& pattern);

struct HafnianSum {
  /// partial_sums[n] is the sum over patterns of total n supported exactly
  /// on S, accumulated over all totals <= n; entries below |S| are zero.
  std::vector<double> partial_sums;
  double torontonian = 0.0;
  /// Tor(O_(S)) minus the last partial sum; nonnegative up to roundoff.
  double residual = 0.0;
};

/// Tor(O_(S)) = sum over PNR patterns s with support exactly S of
/// Haf(X O_(s)) / prod s_k!, truncated at total photon number `cutoff`.
HafnianSum tor_as_hafnian_sum(const QuadratureState& state, const ClickPattern& pattern, int cutoff);

struct ThresholdDistribution {
  int modes = 0;
  /// Sorted lexicographically by clicked-mode list.
  std::vector<std::pair<ClickPattern, double>> table;
  double normalization_defect = 0.0;

  double probability(const ClickPattern& pattern) const;
  /// Probabilities indexed by ClickPattern::mask().
  std::vector<double> by_mask() const;
};

ThresholdDistribution distribution(const QuadratureState& state, int threads = 1);

/// Mean and second moment of the total photon number of a zero-mean state.
struct PhotonNumberMoments {
  double mean = 0.0;
  double second_moment = 0.0;
};

/// Closed forms E[N] = (Tr V - 2l) / 4 and Var N = (Tr V^2 - 2l) / 8.
PhotonNumberMoments photon_number_moments(const QuadratureState& state);

struct CutoffCheck {
  int cutoff = 0;
  /// Half the l1 distance between the PNR distribution p and the threshold
  /// distribution p' (placed on collision-free patterns), summed over PNR
  /// patterns with at most `cutoff` photons.
  double total_variation = 0.0;
  /// Probability mass of PNR patterns above the cutoff.
  double tail = 0.0;
};

struct CollisionReport {
  /// Total probability of a collision, sum_S (Tor - Haf) / sqrt(det Sigma).
  double epsilon = 0.0;
  /// Per click pattern, (Tor(O_(S)) - Haf(X O_(S))) / sqrt(det Sigma).
  std::vector<std::pair<ClickPattern, double>> gaps;
  PhotonNumberMoments moments;
  /// 8 E[N^2] / l.
  double bound = 0.0;
  std::optional<CutoffCheck> cutoff_check;
};

/// photon_cutoff > 0 also runs the pattern-wise total-variation check
/// (limited to l <= 4).
CollisionReport collision_probability(const QuadratureState& state, int photon_cutoff = 0, int threads = 1);

struct PhotonMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double tail = 0.0;
  /// q(N) for N = 0..cutoff.
  std::vector<double> distribution;
};

inline constexpr double kPhotonTailLimit = 1e-12;

/// Moments of the total photon number of a product of single-mode squeezed
/// vacua, from truncated Fock laws. Throws NumericalError if the mass above
/// `cutoff` is not below kPhotonTailLimit.
PhotonMoments photon_moments(std::span<const double> squeezing, int cutoff);

struct HaarCollisionResult {
  std::vector<double> epsilons;
  double mean = 0.0;
  double standard_error = 0.0;
  double bound = 0.0;
  /// mean + 1.645 * standard_error < bound, or everything zero when the
  /// input carries no photons.
  bool below_bound = false;
};

/// Collision probability of squeezed_state(r) after each of `trials` Haar
/// interferometers; trial i draws its unitary from substream (seed, i).
HaarCollisionResult haar_collision_experiment(int modes, std::span<const double> squeezing, int trials,
                                              std::uint64_t seed, int threads = 1);

}  // namespace tgbs
