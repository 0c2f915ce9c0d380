#pragma once

// Homodyne and heterodyne measurements on signed Gaussian mixtures.
//
// Outcomes are quadrature pairs r = (x, p) with hbar = 2; a heterodyne
// outcome corresponds to alpha = (x + i p) / 2. A measurement with
// covariance W has outcome density
//
//   p(r) = sum_k a_k N(r; rbar_k, V_k + W)
//
// where (V_k, rbar_k) is the measured mode of branch k.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tgbs/random.hpp"
#include "tgbs/sampler.hpp"

namespace tgbs {

inline constexpr double kDefaultHomodyneSqueezing = 1e3;
inline constexpr double kNegativityTolerance = 1e-9;
inline constexpr int kNegativityProbes = 10000;

class GaussianPOVM {
 public:
  enum class Kind { kHomodyne, kHeterodyne, kCustom };

  /// x-quadrature homodyne, W = diag(1/s^2, s^2).
  static GaussianPOVM homodyne(double s = kDefaultHomodyneSqueezing);
  /// W = identity.
  static GaussianPOVM heterodyne();
  static GaussianPOVM custom(const Eigen::Matrix2d& W);

  const Eigen::Matrix2d& W() const { return W_; }
  Kind kind() const { return kind_; }
  /// "hom", "het" or "custom".
  std::string label() const;

 private:
  GaussianPOVM(Eigen::Matrix2d W, Kind kind);
  Eigen::Matrix2d W_;
  Kind kind_;
};

struct DensityComponent {
  double weight = 0.0;
  Eigen::Matrix2d covariance;
  Eigen::Vector2d mean;
};

/// Signed mixture of normalized 2D Gaussians that is a true density.
class OutcomeDensity {
 public:
  /// Checks that the weights sum to one and probes kNegativityProbes
  /// Halton points for negative values; throws NumericalError otherwise.
  explicit OutcomeDensity(std::vector<DensityComponent> components);

  const std::vector<DensityComponent>& components() const { return components_; }
  double normalization() const { return normalization_; }

  double operator()(const Eigen::Vector2d& r) const;
  double marginal_x(double x) const;
  double cdf_x(double x) const;
  /// CDF of p given x.
  double conditional_cdf_p(double p, double x) const;
  /// Lowest value found by the negativity probe.
  double min_probe_value() const { return min_probe_; }

 private:
  std::vector<DensityComponent> components_;
  double normalization_ = 0.0;
  double min_probe_ = 0.0;
};

/// Single-mode mixture of the mode `label`, weights unchanged.
GaussianMixture marginal(const GaussianMixture& mixture, int label);

OutcomeDensity outcome_density(const GaussianMixture& mixture, int label, const GaussianPOVM& povm);

/// Inverse-CDF draw: x from its marginal, then p from the conditional, each
/// solved by bisection to |F - u| <= tol.
Eigen::Vector2d sample_outcome(const OutcomeDensity& density, Rng& rng, double tol = 1e-12);

struct BackactionResult {
  GaussianMixture mixture;
  /// p(r) at the observed outcome.
  double density = 0.0;
};

/// Conditions every branch on outcome r of `label` and drops the mode.
BackactionResult backaction(const GaussianMixture& mixture, int label, const GaussianPOVM& povm,
                            const Eigen::Vector2d& outcome);

enum class Pipeline {
  /// Threshold detection of every mode of a Gaussian state.
  kThreshold,
  /// Heralded clicks, then threshold detection of the rest.
  kHeraldThreshold,
  /// Heralded clicks, then homodyne on the listed modes.
  kHeraldHomodyne,
  /// Heralded clicks, then heterodyne on the listed modes.
  kHeraldHeterodyne,
};

struct PipelineConfig {
  Pipeline pipeline = Pipeline::kThreshold;
  QuadratureState state;
  std::vector<int> herald_modes;
  std::vector<bool> herald_clicks;
  /// Applied to the modes left after heralding, in label order.
  std::optional<ComplexUnitary> unitary;
  /// Modes measured by the dyne measurement (pipelines C and D), in order.
  std::vector<int> measured_modes;
  double homodyne_squeezing = kDefaultHomodyneSqueezing;
  std::size_t shots = 1;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct CvOutcome {
  int mode = 0;
  std::string povm;
  Eigen::Vector2d outcome;
};

struct PipelineRecord {
  /// Threshold clicks of the sampled modes (pipelines A and B).
  ClickPattern pattern;
  std::vector<CvOutcome> cv;
  std::uint64_t seed = 0;
  std::uint64_t substream = 0;
};

struct PipelineResult {
  double herald_probability = 1.0;
  std::size_t branches = 1;
  std::vector<PipelineRecord> records;
};

/// Shot i draws from Rng::substream(seed, i).
PipelineResult simulate_pipeline(const PipelineConfig& config);

}  // namespace tgbs
