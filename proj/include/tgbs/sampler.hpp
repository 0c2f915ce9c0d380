#pragma once

// Exact threshold-detector sampling by mode-by-mode conditioning. A click
// turns each Gaussian branch rho into (rho - q rho') / (1 - p), so the
// conditional state is a signed mixture of Gaussians whose size doubles
// with every click.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tgbs/gaussian.hpp"
#include "tgbs/random.hpp"

namespace tgbs {

inline constexpr double kWeightSumTolerance = 1e-9;
inline constexpr double kImpossibleEvent = 1e-300;

struct MixtureBranch {
  double weight = 1.0;
  QuadratureState state;
};

/// Signed Gaussian mixture over the modes not yet measured.
class GaussianMixture {
 public:
  GaussianMixture() = default;
  explicit GaussianMixture(const QuadratureState& state);
  GaussianMixture(std::vector<int> labels, std::vector<MixtureBranch> branches,
                  std::vector<std::pair<int, bool>> history = {});

  /// Number of remaining modes.
  int modes() const { return static_cast<int>(labels_.size()); }
  /// Original 1-based mode numbers of the remaining modes, in state order.
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<MixtureBranch>& branches() const { return branches_; }
  std::size_t size() const { return branches_.size(); }
  /// (mode label, clicked) for every measured mode, in measurement order.
  const std::vector<std::pair<int, bool>>& history() const { return history_; }
  double weight_sum() const;
  /// Position of a mode label within the remaining modes; throws if absent.
  int position(int label) const;

  /// Probability that the detector on `label` does not click.
  double no_click_probability(int label) const;
  /// Conditions on the given outcome and returns its probability.
  double condition(int label, bool click);
  /// Draws the outcome for `label` (no click when u < p) and conditions on
  /// it. Returns (clicked, no-click probability before the step).
  std::pair<bool, double> draw(int label, Rng& rng);

  /// Drops branches with |weight| below tau. Approximate; never used unless
  /// requested.
  void prune(double tau);

  /// Weight sum within kWeightSumTolerance and every branch physical.
  bool valid() const;

 private:
  // Conditions on the outcome chosen by decide(p_no_click); returns p.
  template <typename Decide>
  double update(int label, Decide&& decide, bool& click);

  std::vector<int> labels_;
  std::vector<MixtureBranch> branches_;
  std::vector<std::pair<int, bool>> history_;
};

/// Vacuum-projection update of one branch on the mode at `position`
/// (0-based within the state): the no-click weight
///   q = 2 exp(-r_B^T (V_B + 1)^{-1} r_B / 2) / sqrt(det(V_B + 1))
/// and the conditioned state on the remaining modes.
std::pair<double, QuadratureState> condition_no_click(const QuadratureState& state, int position);

/// State with the mode at `position` traced out.
QuadratureState trace_out(const QuadratureState& state, int position);

struct SamplerOptions {
  /// Mode labels in measurement order; empty means l, l-1, ..., 1.
  std::vector<int> order;
  /// Drop branches with |weight| < prune_threshold after each click.
  /// Zero (the default) keeps the sampler exact.
  double prune_threshold = 0.0;
};

struct SampleRecord {
  ClickPattern pattern;
  std::vector<int> order;
  /// No-click probability of the mixture before each step.
  std::vector<double> no_click_probabilities;
  /// Branch count after each step.
  std::vector<std::size_t> branch_counts;
  std::uint64_t seed = 0;
  std::uint64_t substream = 0;
  bool approximate = false;

  /// Product of the probabilities of the outcomes actually drawn.
  double path_probability() const;
};

/// Draws one outcome for `label`: no click when u < p, u uniform in [0, 1).
bool step(GaussianMixture& mixture, int label, Rng& rng);

SampleRecord sample(const QuadratureState& state, Rng& rng, const SamplerOptions& options = {});

/// Sample i uses Rng::substream(seed, first + i), so any split of a batch
/// reproduces the same records.
std::vector<SampleRecord> sample_batch(const QuadratureState& state, std::size_t n, std::uint64_t seed,
                                       int threads = 1, const SamplerOptions& options = {},
                                       std::uint64_t first = 0);

struct HeraldResult {
  GaussianMixture mixture;
  double probability = 1.0;
};

/// Conditions on fixed outcomes for the listed modes (in the given order).
/// Throws NumericalError if the heralding probability drops below 1e-300.
HeraldResult herald(const GaussianMixture& mixture, std::span<const int> labels, const std::vector<bool>& clicks);
HeraldResult herald(const QuadratureState& state, std::span<const int> labels, const std::vector<bool>& clicks);

}  // namespace tgbs
