#pragma once

// Small numerical kernels shared by the Torontonian and Hafnian evaluators.

#include <cmath>
#include <complex>
#include <type_traits>
#include <vector>

#include <Eigen/Eigenvalues>

namespace tgbs::detail {

template <typename T>
struct RealOf {
  using type = T;
};
template <typename T>
struct RealOf<std::complex<T>> {
  using type = T;
};
template <typename T>
using RealOfT = typename RealOf<T>::type;

inline constexpr Eigen::Index kEigenTraceThreshold = 8;

/// Coefficients h_0..h_K of exp(sum_{k>=1} g[k] eta^k); g[0] is ignored.
template <typename Scalar>
std::vector<Scalar> exp_series(const std::vector<Scalar>& g, int order) {
  std::vector<Scalar> h(order + 1, Scalar(0));
  h[0] = Scalar(1);
  for (int n = 1; n <= order; ++n) {
    Scalar acc(0);
    for (int k = 1; k <= n && k < static_cast<int>(g.size()); ++k) acc += Scalar(k) * g[k] * h[n - k];
    h[n] = acc / Scalar(n);
  }
  return h;
}

/// Tr(C^k) for k = 0..order. Repeated products below kEigenTraceThreshold,
/// eigenvalue power sums at or above it.
template <typename MatrixType>
std::vector<typename MatrixType::Scalar> power_traces(const MatrixType& C, int order, bool hermitian) {
  using Scalar = typename MatrixType::Scalar;
  std::vector<Scalar> traces(order + 1, Scalar(0));
  traces[0] = Scalar(static_cast<double>(C.rows()));
  if (C.rows() == 0 || order == 0) return traces;
  if (C.rows() < kEigenTraceThreshold) {
    MatrixType P = C;
    traces[1] = P.trace();
    for (int k = 2; k <= order; ++k) {
      P = (P * C).eval();
      traces[k] = P.trace();
    }
    return traces;
  }
  using PlainMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Complex = std::complex<RealOfT<Scalar>>;
  std::vector<Complex> eigenvalues;
  if (hermitian) {
    Eigen::SelfAdjointEigenSolver<PlainMatrix> eig(C, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) eigenvalues.emplace_back(eig.eigenvalues()(i));
  } else if constexpr (std::is_same_v<Scalar, Complex>) {
    Eigen::ComplexEigenSolver<PlainMatrix> eig(C, false);
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) eigenvalues.push_back(eig.eigenvalues()(i));
  } else {
    Eigen::EigenSolver<PlainMatrix> eig(C, false);
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) eigenvalues.push_back(eig.eigenvalues()(i));
  }
  std::vector<Complex> powers(eigenvalues);
  for (int k = 1; k <= order; ++k) {
    Complex sum(0);
    for (std::size_t i = 0; i < powers.size(); ++i) {
      sum += powers[i];
      powers[i] *= eigenvalues[i];
    }
    if constexpr (std::is_same_v<Scalar, Complex>) {
      traces[k] = sum;
    } else {
      traces[k] = sum.real();
    }
  }
  return traces;
}

/// Coefficient of eta^order in det(1 - eta C)^{-1/2}, expanded as
/// exp(sum_k Tr(C^k) eta^k / (2k)).
template <typename MatrixType>
typename MatrixType::Scalar inverse_sqrt_det_coefficient(const MatrixType& C, int order, bool hermitian) {
  using Scalar = typename MatrixType::Scalar;
  if (order == 0) return Scalar(1);
  const auto traces = power_traces(C, order, hermitian);
  std::vector<Scalar> g(order + 1, Scalar(0));
  for (int k = 1; k <= order; ++k) g[k] = traces[k] / Scalar(2.0 * k);
  return exp_series(g, order)[order];
}

/// In-place Cholesky of the Hermitian positive-definite matrix stored
/// row-major in a[0..n*n) (lower triangle read). Returns the product of the
/// diagonal of L, i.e. sqrt(det), or a non-positive value on failure.
template <typename Scalar>
RealOfT<Scalar> cholesky_sqrt_det(Scalar* a, int n) {
  using Real = RealOfT<Scalar>;
  Real prod(1);
  for (int j = 0; j < n; ++j) {
    Scalar* rowj = a + static_cast<std::ptrdiff_t>(j) * n;
    Real d = std::real(rowj[j]);
    for (int k = 0; k < j; ++k) d -= std::norm(rowj[k]);
    if (!(d > Real(0))) return Real(0);
    const Real ljj = std::sqrt(d);
    rowj[j] = Scalar(ljj);
    prod *= ljj;
    const Real inv = Real(1) / ljj;
    for (int i = j + 1; i < n; ++i) {
      Scalar* rowi = a + static_cast<std::ptrdiff_t>(i) * n;
      Scalar s = rowi[j];
      for (int k = 0; k < j; ++k) {
        if constexpr (std::is_same_v<Scalar, Real>) {
          s -= rowi[k] * rowj[k];
        } else {
          s -= rowi[k] * std::conj(rowj[k]);
        }
      }
      rowi[j] = s * inv;
    }
  }
  return prod;
}

}  // namespace tgbs::detail
