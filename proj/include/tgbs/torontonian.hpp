#pragma once

// Torontonian of a block-structured 2N x 2N kernel:
//
//   Tor(O) = sum_{Z subset [N]} (-1)^{N - |Z|} / sqrt(det(1 - O_(Z)))
//
// where O_(Z) keeps rows and columns {Z, Z + N}. With this sign the
// single-mode squeezed kernel gives cosh(r) - 1 and Tor(O_(S)) / sqrt(det
// Sigma) is the threshold click probability of pattern S.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tgbs/detail/series.hpp"
#include "tgbs/gaussian.hpp"
#include "tgbs/parallel.hpp"
#include "tgbs/types.hpp"

namespace tgbs {

enum class TorontonianSign {
  /// (-1)^{N - |Z|} on the kept set; the physical convention.
  kComplementParity,
  /// (-1)^{|Z|} on the kept set. Equals (-1)^N times the physical value;
  /// exists only so validation can prove it is rejected.
  kSubsetParity,
};

struct TorontonianOptions {
  int threads = 1;
  TorontonianSign sign = TorontonianSign::kComplementParity;
};

template <typename Real>
struct TorontonianResult {
  Real value = 0;
  std::uint64_t terms = 0;
  Real max_term_magnitude = 0;
  std::string summation = "pairwise tree over lexicographic subsets, fixed 4096-term chunks";
  /// Set when max_term_magnitude / |value| > 1e12.
  bool cancellation_warning = false;
};

inline constexpr double kCancellationRatio = 1e12;
inline constexpr int kTorontonianMaxModes = 40;

namespace detail {

inline constexpr int kChunkBits = 12;

inline std::string subset_string(std::uint64_t mask, int n) {
  std::string s = "{";
  bool first = true;
  for (int k = 0; k < n; ++k) {
    if (mask >> k & 1U) {
      s += (first ? "" : ",") + std::to_string(k + 1);
      first = false;
    }
  }
  return s + "}";
}

/// Real symmetric form T^dagger M T of a block-structured Hermitian M, with
/// T = [[1, i], [1, -i]] / sqrt(2) acting mode by mode. T commutes with mode
/// reductions, so det(M_(Z)) = det(R_(Z)). Returns false if M lacks the
/// block structure.
template <typename Real>
bool real_form(const CMatrix<Real>& M, RMatrix<Real>& R) {
  const Eigen::Index n = M.rows() / 2;
  if (n == 0) {
    R.resize(0, 0);
    return true;
  }
  using C = std::complex<Real>;
  CMatrix<Real> T = CMatrix<Real>::Zero(2 * n, 2 * n);
  // Unnormalized T with the 1/2 applied at the end keeps exact inputs exact.
  for (Eigen::Index k = 0; k < n; ++k) {
    T(k, k) = C(1, 0);
    T(k, k + n) = C(0, 1);
    T(k + n, k) = C(1, 0);
    T(k + n, k + n) = C(0, -1);
  }
  const CMatrix<Real> full = Real(0.5) * (T.adjoint() * M * T);
  const Real scale = std::max(Real(1), full.cwiseAbs().maxCoeff());
  if (full.imag().cwiseAbs().maxCoeff() > Real(1e-12) * scale) return false;
  R = full.real();
  R = (Real(0.5) * (R + R.transpose())).eval();
  return true;
}

/// Sums sign(Z) / sqrt(det(M_(Z))) over all Z, deterministic in `threads`.
template <typename Scalar, typename Real>
TorontonianResult<Real> alternating_subset_sum(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& M,
                                               const TorontonianOptions& options) {
  const int n = static_cast<int>(M.rows() / 2);
  const std::uint64_t total = std::uint64_t{1} << n;
  const int chunk_bits = std::min(n, kChunkBits);
  const std::uint64_t chunk_size = std::uint64_t{1} << chunk_bits;
  const std::int64_t chunks = static_cast<std::int64_t>(total >> chunk_bits);

  std::vector<Real> partial(static_cast<std::size_t>(chunks));
  std::vector<Real> chunk_max(static_cast<std::size_t>(chunks));
  parallel_for(chunks, options.threads, [&](std::int64_t c) {
    std::vector<Scalar> work(static_cast<std::size_t>(4 * n * n));
    std::vector<int> idx(2 * n);
    PairwiseSum<Real> sum;
    Real local_max = 0;
    const std::uint64_t begin = static_cast<std::uint64_t>(c) * chunk_size;
    for (std::uint64_t mask = begin; mask < begin + chunk_size; ++mask) {
      int k = 0;
      for (int m = 0; m < n; ++m)
        if (mask >> m & 1U) idx[k++] = m;
      for (int i = 0; i < k; ++i) idx[k + i] = idx[i] + n;
      const int dim = 2 * k;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j <= i; ++j) work[i * dim + j] = M(idx[i], idx[j]);
      const Real sqrt_det = dim == 0 ? Real(1) : cholesky_sqrt_det(work.data(), dim);
      if (!(sqrt_det > Real(0)))
        throw NumericalError("torontonian: 1 - O_(Z) is not positive definite for Z = " + subset_string(mask, n) +
                             " (non-physical kernel)");
      const int parity = options.sign == TorontonianSign::kComplementParity ? n - k : k;
      const Real term = (parity % 2 == 0 ? Real(1) : Real(-1)) / sqrt_det;
      local_max = std::max(local_max, std::abs(term));
      sum.add(term);
    }
    partial[static_cast<std::size_t>(c)] = sum.result();
    chunk_max[static_cast<std::size_t>(c)] = local_max;
  });

  PairwiseSum<Real> sum;
  TorontonianResult<Real> result;
  for (std::size_t c = 0; c < partial.size(); ++c) {
    sum.add(partial[c]);
    result.max_term_magnitude = std::max(result.max_term_magnitude, chunk_max[c]);
  }
  result.value = sum.result();
  result.terms = total;
  result.cancellation_warning = result.max_term_magnitude > Real(kCancellationRatio) * std::abs(result.value);
  return result;
}

}  // namespace detail

/// Torontonian of a 2N x 2N kernel (N = 0 gives 1). Throws NumericalError
/// naming the subset when some 1 - O_(Z) is not positive definite.
template <typename Real = double>
TorontonianResult<Real> torontonian(const CMatrix<Real>& O, const TorontonianOptions& options = {}) {
  if (O.rows() != O.cols() || O.rows() % 2 != 0)
    throw std::invalid_argument("torontonian: kernel must be 2N x 2N");
  const int n = static_cast<int>(O.rows() / 2);
  if (n > kTorontonianMaxModes) throw std::invalid_argument("torontonian: N exceeds 40");
  const CMatrix<Real> M = CMatrix<Real>::Identity(2 * n, 2 * n) - O;
  RMatrix<Real> R;
  if (detail::real_form(M, R)) return detail::alternating_subset_sum<Real, Real>(R, options);
  return detail::alternating_subset_sum<std::complex<Real>, Real>(M, options);
}

inline TorontonianResult<double> torontonian(const KernelMatrix& O, const TorontonianOptions& options = {}) {
  return torontonian<double>(O.matrix(), options);
}

/// det(1 - O_(Z)) for Z given as 1-based mode numbers, via Hermitian Cholesky.
template <typename Real = double>
Real subset_determinant(const CMatrix<Real>& O, std::span<const int> subset) {
  const int n = static_cast<int>(O.rows() / 2);
  std::vector<int> counts(n, 0);
  for (int z : subset) {
    if (z < 1 || z > n) throw std::invalid_argument("subset_determinant: index out of range");
    if (counts[z - 1]++) throw std::invalid_argument("subset_determinant: repeated index");
  }
  CMatrix<Real> M = reduce(CMatrix<Real>::Identity(2 * n, 2 * n) - O, std::span<const int>(counts));
  const int dim = static_cast<int>(M.rows());
  if (dim == 0) return Real(1);
  Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> work = M;
  const Real sqrt_det = detail::cholesky_sqrt_det(work.data(), dim);
  if (!(sqrt_det > Real(0))) throw NumericalError("subset_determinant: non-positive pivot");
  return sqrt_det * sqrt_det;
}

/// Coefficients c_0..c_K of Tor(eta O) as a power series in eta, summing
/// the expansion of det(1 - eta O_(Z))^{-1/2} over subsets.
template <typename Real = double>
std::vector<Real> torontonian_series(const CMatrix<Real>& O, int order,
                                     TorontonianSign sign = TorontonianSign::kComplementParity) {
  if (order < 0) throw std::invalid_argument("torontonian_series: order must be nonnegative");
  if (O.rows() != O.cols() || O.rows() % 2 != 0)
    throw std::invalid_argument("torontonian_series: kernel must be 2N x 2N");
  const int n = static_cast<int>(O.rows() / 2);
  if (n > 30) throw std::invalid_argument("torontonian_series: N exceeds 30");
  using Vec = RVector<Real>;
  PairwiseSum<Vec> sum(Vec::Zero(order + 1));
  std::vector<int> counts(n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    int k = 0;
    for (int m = 0; m < n; ++m) k += counts[m] = static_cast<int>(mask >> m & 1U);
    const CMatrix<Real> sub = reduce(O, std::span<const int>(counts));
    const auto traces = detail::power_traces(sub, order, true);
    std::vector<Real> g(order + 1, Real(0));
    for (int j = 1; j <= order; ++j) g[j] = traces[j].real() / Real(2 * j);
    const auto h = detail::exp_series(g, order);
    const int parity = sign == TorontonianSign::kComplementParity ? n - k : k;
    Vec term = Eigen::Map<const Vec>(h.data(), order + 1);
    if (parity % 2) term = -term;
    sum.add(std::move(term));
  }
  const Vec total = sum.result();
  return std::vector<Real>(total.data(), total.data() + total.size());
}

/// Upper bound on |Tor(O) - sum_{k<=K} c_k|: per subset the series of
/// det(1 - eta C)^{-1/2} is majorized by (1 - rho eta)^{-|Z|}, rho the
/// spectral radius of O.
template <typename Real = double>
Real torontonian_series_tail_bound(const CMatrix<Real>& O, int order) {
  const int n = static_cast<int>(O.rows() / 2);
  if (n == 0) return Real(0);
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> eig(O, Eigen::EigenvaluesOnly);
  const Real rho = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (!(rho < Real(1))) return std::numeric_limits<Real>::infinity();
  if (rho == Real(0)) return Real(0);
  Real bound = 0;
  Real binom_n = 1;  // C(n_total, size)
  for (int size = 0; size <= n; ++size) {
    if (size > 0) binom_n = binom_n * Real(n - size + 1) / Real(size);
    if (size == 0) continue;
    // Tail of sum_k C(size + k - 1, k) rho^k beyond k = order.
    Real coeff = 1, tail = 0;
    for (int k = 1;; ++k) {
      coeff *= Real(size + k - 1) / Real(k) * rho;
      if (k > order) {
        tail += coeff;
        if (coeff < std::numeric_limits<Real>::epsilon() * tail && k > order + 10) break;
      }
      if (k > order + 100000) break;
    }
    bound += binom_n * tail;
  }
  return bound;
}

}  // namespace tgbs
