#include "tgbs/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace tgbs {

namespace {

double max_abs(const auto& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// C = [[1, i], [1, -i]] in block form.
ComplexMatrix amplitude_transform(int l) {
  const Complex i(0.0, 1.0);
  ComplexMatrix C = ComplexMatrix::Zero(2 * l, 2 * l);
  for (int k = 0; k < l; ++k) {
    C(k, k) = 1.0;
    C(k, k + l) = i;
    C(k + l, k) = 1.0;
    C(k + l, k + l) = -i;
  }
  return C;
}

double block_symmetry_defect(const ComplexMatrix& A) {
  const int l = static_cast<int>(A.rows() / 2);
  const ComplexMatrix X = block_swap(l);
  return max_abs(A - X * A.conjugate() * X);
}

}  // namespace

ClickPattern::ClickPattern(int modes, std::vector<int> clicked)
    : modes_(modes), clicked_(std::move(clicked)) {
  if (modes < 0) throw std::invalid_argument("ClickPattern: negative mode count");
  std::sort(clicked_.begin(), clicked_.end());
  for (std::size_t i = 0; i < clicked_.size(); ++i) {
    if (clicked_[i] < 1 || clicked_[i] > modes)
      throw std::invalid_argument("ClickPattern: mode " + std::to_string(clicked_[i]) +
                                  " out of range 1.." + std::to_string(modes));
    if (i > 0 && clicked_[i] == clicked_[i - 1])
      throw std::invalid_argument("ClickPattern: repeated mode " + std::to_string(clicked_[i]));
  }
}

ClickPattern ClickPattern::from_mask(int modes, std::uint64_t mask) {
  std::vector<int> clicked;
  for (int k = 0; k < modes; ++k)
    if (mask >> k & 1U) clicked.push_back(k + 1);
  return ClickPattern(modes, std::move(clicked));
}

bool ClickPattern::contains(int mode) const {
  return std::binary_search(clicked_.begin(), clicked_.end(), mode);
}

std::uint64_t ClickPattern::mask() const {
  std::uint64_t m = 0;
  for (int k : clicked_) m |= std::uint64_t{1} << (k - 1);
  return m;
}

PNRPattern::PNRPattern(std::vector<int> counts) : counts_(std::move(counts)) {
  for (int c : counts_)
    if (c < 0) throw std::invalid_argument("PNRPattern: negative photon count");
}

PNRPattern PNRPattern::from_clicks(const ClickPattern& pattern) {
  std::vector<int> counts(pattern.modes(), 0);
  for (int k : pattern.clicked()) counts[k - 1] = 1;
  return PNRPattern(std::move(counts));
}

int PNRPattern::total() const {
  int n = 0;
  for (int c : counts_) n += c;
  return n;
}

bool PNRPattern::has_collision() const {
  return std::any_of(counts_.begin(), counts_.end(), [](int c) { return c > 1; });
}

QuadratureState::QuadratureState(Matrix V, Vector means) : V_(std::move(V)), means_(std::move(means)) {
  if (V_.rows() != V_.cols() || V_.rows() % 2 != 0)
    throw std::invalid_argument("QuadratureState: covariance must be 2l x 2l");
  if (means_.size() != V_.rows())
    throw std::invalid_argument("QuadratureState: mean vector length must be 2l");
  if (!V_.allFinite() || !means_.allFinite())
    throw std::invalid_argument("QuadratureState: non-finite entries");
  const double scale = std::max(1.0, max_abs(V_));
  if (max_abs(V_ - V_.transpose()) > kSymmetryTolerance * scale)
    throw NumericalError("QuadratureState: covariance is not symmetric");
}

HusimiCovariance::HusimiCovariance(ComplexMatrix sigma) : sigma_(std::move(sigma)) {
  if (sigma_.rows() != sigma_.cols() || sigma_.rows() % 2 != 0)
    throw std::invalid_argument("HusimiCovariance: matrix must be 2l x 2l");
  const double tol = 1e-10 * std::max(1.0, max_abs(sigma_));
  if (max_abs(sigma_ - sigma_.adjoint()) > tol)
    throw NumericalError("HusimiCovariance: matrix is not Hermitian");
  if (block_symmetry_defect(sigma_) > tol)
    throw NumericalError("HusimiCovariance: block structure violated");
}

double HusimiCovariance::determinant() const {
  Eigen::LLT<ComplexMatrix> llt(sigma_);
  if (llt.info() != Eigen::Success) throw NumericalError("HusimiCovariance: not positive definite");
  double det = 1.0;
  for (Eigen::Index i = 0; i < sigma_.rows(); ++i) det *= std::norm(llt.matrixLLT()(i, i));
  return det;
}

KernelMatrix::KernelMatrix(ComplexMatrix O) : O_(std::move(O)) {
  if (O_.rows() != O_.cols() || O_.rows() % 2 != 0)
    throw std::invalid_argument("KernelMatrix: matrix must be 2N x 2N");
  if (block_symmetry_defect(O_) > 1e-10 * std::max(1.0, max_abs(O_)))
    throw NumericalError("KernelMatrix: block structure violated");
}

ComplexUnitary::ComplexUnitary(ComplexMatrix U, double tolerance) : U_(std::move(U)) {
  if (U_.rows() != U_.cols() || U_.rows() == 0)
    throw std::invalid_argument("ComplexUnitary: matrix must be square and non-empty");
  if (unitarity_defect() > tolerance)
    throw std::invalid_argument("ComplexUnitary: matrix is not unitary (defect " +
                                std::to_string(unitarity_defect()) + ")");
}

double ComplexUnitary::unitarity_defect() const {
  return max_abs(U_.adjoint() * U_ - ComplexMatrix::Identity(U_.rows(), U_.cols()));
}

ComplexMatrix block_swap(int n) {
  ComplexMatrix X = ComplexMatrix::Zero(2 * n, 2 * n);
  X.topRightCorner(n, n).setIdentity();
  X.bottomLeftCorner(n, n).setIdentity();
  return X;
}

Matrix symplectic_form(int modes) {
  Matrix omega = Matrix::Zero(2 * modes, 2 * modes);
  omega.topRightCorner(modes, modes).setIdentity();
  omega.bottomLeftCorner(modes, modes) = -Matrix::Identity(modes, modes);
  return omega;
}

QuadratureState vacuum_state(int modes) {
  if (modes < 1) throw std::invalid_argument("vacuum_state: need at least one mode");
  return QuadratureState(Matrix::Identity(2 * modes, 2 * modes), Vector::Zero(2 * modes));
}

QuadratureState squeezed_state(std::span<const double> squeezing) {
  const int l = static_cast<int>(squeezing.size());
  if (l < 1) throw std::invalid_argument("squeezed_state: need at least one mode");
  Vector diag(2 * l);
  for (int k = 0; k < l; ++k) {
    if (!std::isfinite(squeezing[k])) throw std::invalid_argument("squeezed_state: non-finite squeezing");
    diag(k) = std::exp(2.0 * squeezing[k]);
    diag(k + l) = std::exp(-2.0 * squeezing[k]);
  }
  return QuadratureState(diag.asDiagonal(), Vector::Zero(2 * l));
}

QuadratureState thermal_state(std::span<const double> nbar) {
  const int l = static_cast<int>(nbar.size());
  if (l < 1) throw std::invalid_argument("thermal_state: need at least one mode");
  Vector diag(2 * l);
  for (int k = 0; k < l; ++k) {
    if (!(nbar[k] >= 0.0)) throw std::invalid_argument("thermal_state: negative photon number");
    diag(k) = diag(k + l) = 2.0 * nbar[k] + 1.0;
  }
  return QuadratureState(diag.asDiagonal(), Vector::Zero(2 * l));
}

QuadratureState coherent_state(std::span<const Complex> beta) {
  const int l = static_cast<int>(beta.size());
  if (l < 1) throw std::invalid_argument("coherent_state: need at least one mode");
  Vector means(2 * l);
  for (int k = 0; k < l; ++k) {
    means(k) = 2.0 * beta[k].real();
    means(k + l) = 2.0 * beta[k].imag();
  }
  return QuadratureState(Matrix::Identity(2 * l, 2 * l), means);
}

Matrix interferometer_symplectic(const ComplexUnitary& U) {
  const int l = U.dimension();
  const Matrix re = U.matrix().real();
  const Matrix im = U.matrix().imag();
  Matrix S(2 * l, 2 * l);
  S << re, -im, im, re;
  return S;
}

QuadratureState apply_interferometer(const QuadratureState& state, const ComplexUnitary& U) {
  if (U.dimension() != state.modes())
    throw std::invalid_argument("apply_interferometer: unitary dimension differs from mode count");
  const Matrix S = interferometer_symplectic(U);
  Matrix V = S * state.covariance() * S.transpose();
  V = 0.5 * (V + V.transpose()).eval();
  return QuadratureState(std::move(V), S * state.means());
}

QuadratureState permute_modes(const QuadratureState& state, std::span<const int> perm) {
  const int l = state.modes();
  if (static_cast<int>(perm.size()) != l) throw std::invalid_argument("permute_modes: wrong permutation size");
  std::vector<int> idx(2 * l);
  for (int k = 0; k < l; ++k) {
    idx[k] = perm[k];
    idx[k + l] = perm[k] + l;
  }
  return QuadratureState(state.covariance()(idx, idx), state.means()(idx));
}

ValidationReport validate_state(const QuadratureState& state) {
  ValidationReport report;
  const Matrix& V = state.covariance();
  const int l = state.modes();
  report.symmetry_defect = max_abs(V - V.transpose()) / std::max(1.0, max_abs(V));

  const Complex i(0.0, 1.0);
  const ComplexMatrix H = V.cast<Complex>() + i * symplectic_form(l).cast<Complex>();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> uncertainty(H, Eigen::EigenvaluesOnly);
  report.min_uncertainty_eigenvalue = uncertainty.eigenvalues().minCoeff();

  Eigen::SelfAdjointEigenSolver<Matrix> vEig(V, Eigen::EigenvaluesOnly);
  report.covariance_condition = vEig.eigenvalues().maxCoeff() / vEig.eigenvalues().minCoeff();

  report.physical = report.symmetry_defect <= kSymmetryTolerance &&
                    report.min_uncertainty_eigenvalue >= -kPhysicalityTolerance;
  if (!report.physical) {
    report.warnings.push_back("uncertainty principle violated: min eig(V + i Omega) = " +
                              std::to_string(report.min_uncertainty_eigenvalue));
    report.sigma_condition = std::numeric_limits<double>::infinity();
    return report;
  }
  if (report.min_uncertainty_eigenvalue < -1e-12)
    report.warnings.push_back("min eig(V + i Omega) slightly negative, accepted within tolerance");

  const ComplexMatrix C = amplitude_transform(l);
  const ComplexMatrix sigma = 0.25 * C * V.cast<Complex>() * C.adjoint() +
                              0.5 * ComplexMatrix::Identity(2 * l, 2 * l);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> sEig(sigma, Eigen::EigenvaluesOnly);
  report.sigma_condition = sEig.eigenvalues().maxCoeff() / sEig.eigenvalues().minCoeff();
  if (report.covariance_condition > kConditionWarning)
    report.warnings.push_back("ill-conditioned covariance: cond(V) = " +
                              std::to_string(report.covariance_condition));
  return report;
}

void require_physical(const QuadratureState& state) {
  const ValidationReport report = validate_state(state);
  if (!report.physical)
    throw NumericalError("non-physical state: " +
                         (report.warnings.empty() ? std::string("symmetry defect") : report.warnings.front()));
}

HusimiCovariance husimi_covariance(const QuadratureState& state) {
  require_physical(state);
  const int l = state.modes();
  const ComplexMatrix C = amplitude_transform(l);
  ComplexMatrix sigma = 0.25 * C * state.covariance().cast<Complex>() * C.adjoint() +
                        0.5 * ComplexMatrix::Identity(2 * l, 2 * l);
  sigma = 0.5 * (sigma + sigma.adjoint()).eval();
  return HusimiCovariance(std::move(sigma));
}

Matrix quadrature_covariance(const HusimiCovariance& sigma) {
  const int l = sigma.modes();
  const ComplexMatrix C = amplitude_transform(l);
  const ComplexMatrix V = C.adjoint() * (sigma.matrix() - 0.5 * ComplexMatrix::Identity(2 * l, 2 * l)) * C;
  return V.real();
}

KernelMatrix kernel_matrix(const HusimiCovariance& sigma) {
  const int l = sigma.modes();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(sigma.matrix());
  if (eig.info() != Eigen::Success) throw NumericalError("kernel_matrix: eigendecomposition failed");
  const Vector& lambda = eig.eigenvalues();
  if (lambda.minCoeff() <= 0.0 || lambda.maxCoeff() / lambda.minCoeff() > kConditionLimit)
    throw NumericalError("kernel_matrix: Sigma is singular or condition number exceeds 1e14");
  const ComplexMatrix& Q = eig.eigenvectors();
  ComplexMatrix O = ComplexMatrix::Identity(2 * l, 2 * l) -
                    Q * lambda.cwiseInverse().cast<Complex>().asDiagonal() * Q.adjoint();
  // Project onto the exact Hermitian, block-symmetric structure.
  O = 0.5 * (O + O.adjoint()).eval();
  const ComplexMatrix X = block_swap(l);
  O = 0.5 * (O + X * O.conjugate() * X).eval();
  return KernelMatrix(std::move(O));
}

Vector symplectic_eigenvalues(const Matrix& V) {
  const int l = static_cast<int>(V.rows() / 2);
  Eigen::EigenSolver<Matrix> eig(symplectic_form(l) * V, false);
  std::vector<double> nu;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) nu.push_back(std::abs(eig.eigenvalues()(i).imag()));
  std::sort(nu.begin(), nu.end());
  Vector out(l);
  for (int k = 0; k < l; ++k) out(k) = 0.5 * (nu[2 * k] + nu[2 * k + 1]);
  return out;
}

double q_function(const HusimiCovariance& sigma, const ComplexVector& alpha) {
  const int l = sigma.modes();
  if (alpha.size() != 2 * l) throw std::invalid_argument("q_function: alpha must have length 2l");
  const double scale = std::max(1.0, alpha.cwiseAbs().maxCoeff());
  if ((alpha.tail(l) - alpha.head(l).conjugate()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("q_function: second half of alpha must conjugate the first");
  Eigen::LLT<ComplexMatrix> llt(sigma.matrix());
  if (llt.info() != Eigen::Success) throw NumericalError("q_function: Sigma not positive definite");
  const double quad = alpha.dot(llt.solve(alpha)).real();
  double sqrt_det = 1.0;
  for (int i = 0; i < 2 * l; ++i) sqrt_det *= llt.matrixLLT()(i, i).real();
  return std::exp(-0.5 * quad) / (std::pow(std::numbers::pi, l) * sqrt_det);
}

}  // namespace tgbs
