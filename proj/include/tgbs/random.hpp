#pragma once

#include <cstdint>
#include <random>

#include "tgbs/gaussian.hpp"

namespace tgbs {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of substream `index` under master seed `seed`:
///   mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019)).
/// Substreams depend only on (seed, index), never on scheduling.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Random stream used by every stochastic routine.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t seed, std::uint64_t index) {
    return Rng(substream_seed(seed, index));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() { return normal_(engine_); }
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Haar-random unitary: complex Gaussian matrix, QR, then the phases of
/// diag(R) folded into Q.
ComplexUnitary haar_unitary(int dimension, Rng& rng);

struct RandomStateOptions {
  double max_squeezing = 1.0;
  /// Upper bound of the thermal photon number added to each mode before
  /// squeezing; 0 gives pure states.
  double max_thermal = 0.0;
};

/// Thermal noise, single-mode squeezing, then a Haar interferometer.
QuadratureState random_state(int modes, Rng& rng, const RandomStateOptions& options = {});

}  // namespace tgbs
