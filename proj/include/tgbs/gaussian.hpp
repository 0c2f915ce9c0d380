#pragma once

// Gaussian states in quadrature form and their phase-space conversions.
//
// Conventions used throughout the library:
//   * hbar = 2, so the vacuum covariance is the identity.
//   * Quadratures are ordered xxpp: (x_1..x_l, p_1..p_l).
//   * Complex amplitudes are ordered (alpha_1..alpha_l, alpha_1*..alpha_l*).
//   * Public mode numbers run from 1 to l.

#include <span>
#include <string>
#include <vector>

#include "tgbs/types.hpp"

namespace tgbs {

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kPhysicalityTolerance = 1e-10;
inline constexpr double kConditionWarning = 1e8;
inline constexpr double kConditionLimit = 1e14;

/// Covariance V (2l x 2l, xxpp) and mean vector of an l-mode Gaussian state.
class QuadratureState {
 public:
  QuadratureState() = default;
  /// Checks shapes and symmetry of V; physicality is left to
  /// validate_state / require_physical.
  QuadratureState(Matrix V, Vector means);

  int modes() const { return static_cast<int>(V_.rows() / 2); }
  const Matrix& covariance() const { return V_; }
  const Vector& means() const { return means_; }
  bool zero_mean() const { return means_.isZero(0.0); }

 private:
  Matrix V_;
  Vector means_;
};

/// Covariance of the Husimi Q function, blocks [[W, Y*], [Y, W*]].
class HusimiCovariance {
 public:
  explicit HusimiCovariance(ComplexMatrix sigma);

  int modes() const { return static_cast<int>(sigma_.rows() / 2); }
  const ComplexMatrix& matrix() const { return sigma_; }
  ComplexMatrix W() const { return sigma_.topLeftCorner(modes(), modes()); }
  ComplexMatrix Y() const { return sigma_.bottomLeftCorner(modes(), modes()); }
  /// det(Sigma), real and >= 1 for physical states.
  double determinant() const;

 private:
  ComplexMatrix sigma_;
};

/// O = 1 - Sigma^{-1}; the argument of the Torontonian and the Hafnian.
class KernelMatrix {
 public:
  explicit KernelMatrix(ComplexMatrix O);

  int modes() const { return static_cast<int>(O_.rows() / 2); }
  const ComplexMatrix& matrix() const { return O_; }

 private:
  ComplexMatrix O_;
};

class ComplexUnitary {
 public:
  /// Throws std::invalid_argument if U^dagger U deviates from identity by
  /// more than `tolerance` (max-abs entry).
  explicit ComplexUnitary(ComplexMatrix U, double tolerance = 1e-10);

  int dimension() const { return static_cast<int>(U_.rows()); }
  const ComplexMatrix& matrix() const { return U_; }
  double unitarity_defect() const;

 private:
  ComplexMatrix U_;
};

struct ValidationReport {
  double symmetry_defect = 0.0;
  /// Smallest eigenvalue of the Hermitian matrix V + i*Omega.
  double min_uncertainty_eigenvalue = 0.0;
  double sigma_condition = 1.0;
  double covariance_condition = 1.0;
  bool physical = true;
  std::vector<std::string> warnings;
};

/// Symplectic form in xxpp ordering.
Matrix symplectic_form(int modes);

QuadratureState vacuum_state(int modes);
QuadratureState squeezed_state(std::span<const double> squeezing);
/// Product thermal state with mean photon numbers nbar (V = (2 nbar + 1) 1).
QuadratureState thermal_state(std::span<const double> nbar);
/// Coherent state with complex amplitudes beta (means (2 Re beta, 2 Im beta)).
QuadratureState coherent_state(std::span<const Complex> beta);

/// Real 2l x 2l orthogonal symplectic matrix of a passive interferometer.
Matrix interferometer_symplectic(const ComplexUnitary& U);
QuadratureState apply_interferometer(const QuadratureState& state, const ComplexUnitary& U);

/// Relabels modes: output mode k+1 is input mode perm[k]+1 (perm is 0-based).
QuadratureState permute_modes(const QuadratureState& state, std::span<const int> perm);

ValidationReport validate_state(const QuadratureState& state);
/// Throws NumericalError when the state violates the uncertainty principle
/// beyond kPhysicalityTolerance.
void require_physical(const QuadratureState& state);

HusimiCovariance husimi_covariance(const QuadratureState& state);
/// Inverse of husimi_covariance (covariance part only).
Matrix quadrature_covariance(const HusimiCovariance& sigma);
KernelMatrix kernel_matrix(const HusimiCovariance& sigma);

/// Symplectic eigenvalues of V, sorted ascending.
Vector symplectic_eigenvalues(const Matrix& V);

/// Q function at alpha given in (alpha, alpha*) layout (zero-mean state).
double q_function(const HusimiCovariance& sigma, const ComplexVector& alpha);

/// Keeps mode k (0-based) of each l x l block counts[k] times. counts has
/// one entry per mode of A; the result is 2N x 2N with N = sum(counts).
template <typename Derived>
auto reduce(const Eigen::MatrixBase<Derived>& A, std::span<const int> counts) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index l = A.rows() / 2;
  if (A.rows() != A.cols() || A.rows() % 2 != 0 ||
      static_cast<Eigen::Index>(counts.size()) != l) {
    throw std::invalid_argument("reduce: pattern does not match matrix dimension");
  }
  std::vector<Eigen::Index> rows;
  for (Eigen::Index k = 0; k < l; ++k) {
    if (counts[k] < 0) throw std::invalid_argument("reduce: negative multiplicity");
    for (int c = 0; c < counts[k]; ++c) rows.push_back(k);
  }
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  for (Eigen::Index i = 0; i < n; ++i) rows.push_back(rows[i] + l);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < 2 * n; ++j)
    for (Eigen::Index i = 0; i < 2 * n; ++i) out(i, j) = A(rows[i], rows[j]);
  return out;
}

template <typename Derived>
auto reduce(const Eigen::MatrixBase<Derived>& A, const PNRPattern& pattern) {
  return reduce(A, std::span<const int>(pattern.counts()));
}

template <typename Derived>
auto reduce(const Eigen::MatrixBase<Derived>& A, const ClickPattern& pattern) {
  return reduce(A, PNRPattern::from_clicks(pattern));
}

/// Block swap X = [[0, 1], [1, 0]] of dimension 2n.
ComplexMatrix block_swap(int n);

}  // namespace tgbs
