#pragma once

// Hafnian evaluators: the perfect-matching definition, the power-set
// trace formula, and the Torontonian generating-function bridge.

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "tgbs/detail/series.hpp"
#include "tgbs/gaussian.hpp"
#include "tgbs/parallel.hpp"
#include "tgbs/torontonian.hpp"
#include "tgbs/types.hpp"

namespace tgbs {

enum class HafnianArrangement {
  /// f((A X)_(Z)): the swap X pairs row k with row k + l.
  kSwapped,
  /// f(A_(Z)) with no swap. Wrong; kept for mutation tests.
  kUnswapped,
};

/// Binary choices left open by the power-set formula. The default values
/// are the ones that reproduce hafnian_naive; test_hafnian.cpp re-derives
/// them from all four combinations on every run.
struct HafnianConvention {
  /// Reduce to the kept set Z (true) or to its complement (false).
  bool keep_subset = true;
  /// Sign (-1)^{l - |Z|} (true) or (-1)^{|Z|} (false).
  bool complement_parity = true;
  HafnianArrangement arrangement = HafnianArrangement::kSwapped;
};

inline constexpr HafnianConvention kHafnianConvention{};
inline constexpr int kNaiveHafnianMaxHalfDim = 8;

namespace detail {

template <typename Scalar>
Scalar naive_matchings(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A, std::vector<int>& free) {
  if (free.empty()) return Scalar(1);
  const int first = free.front();
  Scalar total(0);
  for (std::size_t j = 1; j < free.size(); ++j) {
    const int partner = free[j];
    std::vector<int> rest;
    rest.reserve(free.size() - 2);
    for (std::size_t i = 1; i < free.size(); ++i)
      if (i != j) rest.push_back(free[i]);
    total += A(first, partner) * naive_matchings(A, rest);
  }
  return total;
}

template <typename Real>
Real binomial(int n, int k) {
  Real b = 1;
  for (int i = 1; i <= k; ++i) b = b * Real(n - k + i) / Real(i);
  return std::round(b);
}

template <typename Derived>
void require_symmetric_even(const Eigen::MatrixBase<Derived>& A, const char* who) {
  if (A.rows() != A.cols()) throw std::invalid_argument(std::string(who) + ": matrix must be square");
  if (A.rows() % 2 != 0) throw std::invalid_argument(std::string(who) + ": odd dimension");
  if (A.size() == 0) return;
  const double scale = std::max(1.0, static_cast<double>(A.cwiseAbs().maxCoeff()));
  if (static_cast<double>((A - A.transpose()).cwiseAbs().maxCoeff()) > 1e-12 * scale)
    throw std::invalid_argument(std::string(who) + ": matrix is not symmetric");
}

}  // namespace detail

/// Sum over perfect matchings; (2m-1)!! terms, m <= 8.
template <typename Derived>
typename Derived::Scalar hafnian_naive(const Eigen::MatrixBase<Derived>& A) {
  using Scalar = typename Derived::Scalar;
  detail::require_symmetric_even(A, "hafnian_naive");
  if (A.rows() / 2 > kNaiveHafnianMaxHalfDim) throw std::invalid_argument("hafnian_naive: dimension above 16");
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> M = A;
  std::vector<int> free(static_cast<std::size_t>(M.rows()));
  for (std::size_t i = 0; i < free.size(); ++i) free[i] = static_cast<int>(i);
  return detail::naive_matchings(M, free);
}

/// Coefficient of eta^order in p(eta C) = exp(sum_k Tr(C^k) eta^k / (2k)).
template <typename Derived>
typename Derived::Scalar f_coefficient(const Eigen::MatrixBase<Derived>& C, int order) {
  if (order < 0) throw std::invalid_argument("f_coefficient: order must be nonnegative");
  if (C.rows() != C.cols()) throw std::invalid_argument("f_coefficient: matrix must be square");
  const Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> M = C;
  return detail::inverse_sqrt_det_coefficient(M, order, false);
}

/// Haf(reduce(A, reps)) where mode k (0-based, of each l x l block) is
/// repeated reps[k] times. Subsets of the expanded index set are grouped by
/// how many copies z_k of each mode they keep:
///
///   Haf = sum_z sign(z) prod_k C(reps_k, z_k) [eta^N] det(1 - eta A X D_z)^{-1/2}
///
/// with D_z = diag(z, z) and N = sum reps.
template <typename Real = double>
std::complex<Real> hafnian_repeated(const CMatrix<Real>& A, std::span<const int> reps,
                                    const HafnianConvention& convention = kHafnianConvention) {
  using C = std::complex<Real>;
  detail::require_symmetric_even(A, "hafnian_repeated");
  const int l = static_cast<int>(A.rows() / 2);
  if (static_cast<int>(reps.size()) != l) throw std::invalid_argument("hafnian_repeated: reps size must be l");
  int total = 0;
  for (int r : reps) {
    if (r < 0) throw std::invalid_argument("hafnian_repeated: negative repetition");
    total += r;
  }
  if (total == 0) return C(1);

  const CMatrix<Real> X = block_swap(l).template cast<C>();
  const CMatrix<Real> base = convention.arrangement == HafnianArrangement::kSwapped ? CMatrix<Real>(A * X) : A;

  std::vector<int> support;
  for (int k = 0; k < l; ++k)
    if (reps[k] > 0) support.push_back(k);
  const int s = static_cast<int>(support.size());

  std::vector<int> z(s, 0);
  PairwiseSum<C> sum;
  while (true) {
    // z indexes the kept copies; the complement convention keeps reps - z.
    std::vector<int> kept(s);
    int kept_total = 0, z_total = 0;
    Real weight = 1;
    for (int i = 0; i < s; ++i) {
      kept[i] = convention.keep_subset ? z[i] : reps[support[i]] - z[i];
      kept_total += kept[i];
      z_total += z[i];
      weight *= detail::binomial<Real>(reps[support[i]], z[i]);
    }
    std::vector<int> idx;
    std::vector<Real> scale;
    for (int i = 0; i < s; ++i)
      if (kept[i] > 0) {
        idx.push_back(support[i]);
        scale.push_back(Real(kept[i]));
      }
    const int m = static_cast<int>(idx.size());
    for (int i = 0; i < m; ++i) {
      idx.push_back(idx[i] + l);
      scale.push_back(scale[i]);
    }
    // An empty reduction contributes det(1)^{-1/2} = 1, which has no eta^N term.
    C term(0);
    if (kept_total > 0) {
      CMatrix<Real> B = base(idx, idx);
      for (int j = 0; j < 2 * m; ++j) B.col(j) *= scale[j];
      term = detail::inverse_sqrt_det_coefficient(B, total, false);
    }
    const int parity = convention.complement_parity ? total - z_total : z_total;
    sum.add((parity % 2 ? Real(-1) : Real(1)) * weight * term);

    int i = 0;
    while (i < s && z[i] == reps[support[i]]) z[i++] = 0;
    if (i == s) break;
    ++z[i];
  }
  return sum.result();
}

/// Power-set formula for a 2l x 2l symmetric matrix (2^l terms).
template <typename Real = double>
std::complex<Real> hafnian_powerset(const CMatrix<Real>& A, const HafnianConvention& convention = kHafnianConvention) {
  detail::require_symmetric_even(A, "hafnian_powerset");
  const std::vector<int> ones(static_cast<std::size_t>(A.rows() / 2), 1);
  return hafnian_repeated<Real>(A, ones, convention);
}

inline constexpr std::int64_t kMultisetHafnianMaxStates = std::int64_t{1} << 26;

/// Haf(reduce(A, reps)) by recursion over multiplicity vectors: the first
/// remaining index of type i pairs with any of the m_j copies of type j.
/// Memoized over the prod (m_t + 1) count vectors. All terms enter with
/// positive combinatorial weight, so unlike the power-set formula this
/// stays accurate for large repetition counts.
template <typename Real = double>
std::complex<Real> hafnian_multiset(const CMatrix<Real>& A, std::span<const int> reps) {
  using C = std::complex<Real>;
  detail::require_symmetric_even(A, "hafnian_multiset");
  const int l = static_cast<int>(A.rows() / 2);
  if (static_cast<int>(reps.size()) != l) throw std::invalid_argument("hafnian_multiset: reps size must be l");
  std::vector<int> types, mult;
  for (int half = 0; half < 2; ++half)
    for (int k = 0; k < l; ++k) {
      if (reps[k] < 0) throw std::invalid_argument("hafnian_multiset: negative repetition");
      if (reps[k] > 0) {
        types.push_back(k + half * l);
        mult.push_back(reps[k]);
      }
    }
  const int t = static_cast<int>(types.size());
  std::vector<std::int64_t> stride(t + 1, 1);
  for (int i = 0; i < t; ++i) {
    stride[i + 1] = stride[i] * (mult[i] + 1);
    if (stride[i + 1] > kMultisetHafnianMaxStates) throw std::invalid_argument("hafnian_multiset: pattern too large");
  }
  std::vector<C> memo(static_cast<std::size_t>(stride[t]));
  std::vector<char> known(static_cast<std::size_t>(stride[t]), 0);
  std::vector<int> m(mult);

  auto rec = [&](auto&& self, std::int64_t key) -> C {
    if (key == 0) return C(1);
    if (known[key]) return memo[key];
    int i = 0;
    while (m[i] == 0) ++i;
    --m[i];
    C total(0);
    for (int j = i; j < t; ++j) {
      if (m[j] == 0) continue;
      const C a = A(types[i], types[j]);
      if (a == C(0)) continue;
      --m[j];
      total += Real(m[j] + 1) * a * self(self, key - stride[i] - stride[j]);
      ++m[j];
    }
    ++m[i];
    memo[key] = total;
    known[key] = 1;
    return total;
  };
  return rec(rec, stride[t] - 1);
}

/// Haf(X O) as the eta^l coefficient of Tor(eta O), O of size 2l x 2l.
template <typename Real = double>
Real hafnian_from_torontonian(const CMatrix<Real>& O) {
  const int l = static_cast<int>(O.rows() / 2);
  return torontonian_series<Real>(O, l)[static_cast<std::size_t>(l)];
}

inline double hafnian_from_torontonian(const KernelMatrix& O) { return hafnian_from_torontonian<double>(O.matrix()); }

}  // namespace tgbs
