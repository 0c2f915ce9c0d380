#pragma once

// Cross-validation driver: every fast route checked against an independent
// slow one on random desk-scale inputs.

#include <cstdint>
#include <string>
#include <vector>

namespace tgbs {

enum class Injection {
  kNone,
  /// Torontonian with the (-1)^{|Z|} sign; threshold_oracle must fail.
  kTorSign,
  /// Power-set Hafnian without the X swap; diagonal_sensitivity must fail.
  kHafArrangement,
};

struct ValidationOptions {
  std::uint64_t seed = 1;
  int threads = 1;
  /// Random inputs per check and size.
  int cases = 10;
  /// Samples for the sampler chi-square check.
  int samples = 20000;
  Injection inject = Injection::kNone;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Worst deviation seen (chi-square statistic for the sampler check).
  double residual = 0.0;
  double tolerance = 0.0;
  int cases = 0;
};

struct ValidationSummary {
  std::vector<CheckResult> checks;
  bool passed() const;
};

ValidationSummary run_validation(const ValidationOptions& options);

}  // namespace tgbs
