#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "test_support.hpp"
#include "tgbs/gaussian.hpp"
#include "tgbs/random.hpp"

using namespace tgbs;
using tgbs::testing::random_kernel;

namespace {

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& A) {
  return A.size() ? static_cast<double>(A.cwiseAbs().maxCoeff()) : 0.0;
}

}  // namespace

TEST_CASE("vacuum has Sigma = 1 and zero kernel") {
  const auto sigma = husimi_covariance(vacuum_state(3));
  CHECK(max_abs(sigma.matrix() - ComplexMatrix::Identity(6, 6)) < 1e-15);
  CHECK(sigma.determinant() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(max_abs(kernel_matrix(sigma).matrix()) < 1e-15);
}

TEST_CASE("single-mode squeezed vacuum in closed form") {
  const double r = 1.0;
  const double c = std::cosh(r), s = std::sinh(r);
  const std::vector<double> sq{r};
  const auto state = squeezed_state(sq);
  CHECK(state.covariance()(0, 0) == doctest::Approx(std::exp(2 * r)).epsilon(1e-14));
  CHECK(state.covariance()(1, 1) == doctest::Approx(std::exp(-2 * r)).epsilon(1e-14));

  const auto sigma = husimi_covariance(state);
  CHECK(std::abs(sigma.matrix()(0, 0) - c * c) < 1e-13);
  CHECK(std::abs(sigma.matrix()(1, 1) - c * c) < 1e-13);
  // Var(x) > Var(p) makes <alpha^2> positive.
  CHECK(std::abs(sigma.matrix()(0, 1) - s * c) < 1e-13);
  CHECK(sigma.determinant() == doctest::Approx(c * c).epsilon(1e-13));

  const auto O = kernel_matrix(sigma).matrix();
  CHECK(std::abs(O(0, 0)) < 1e-13);
  CHECK(std::abs(O(0, 1) - std::tanh(r)) < 1e-13);
}

TEST_CASE("Husimi conversion round trips and stays physical") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int l = 1 + trial % 6;
    const auto state = random_state(l, rng, {1.2, 0.5});
    const auto sigma = husimi_covariance(state);
    CHECK(max_abs(quadrature_covariance(sigma) - state.covariance()) < 1e-10);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(sigma.matrix());
    CHECK(eig.eigenvalues().minCoeff() >= 0.5 - 1e-10);
    // Block structure [[W, Y*], [Y, W*]] of both Sigma and O.
    const auto X = block_swap(l);
    CHECK(max_abs(X * sigma.matrix().conjugate() * X - sigma.matrix()) < 1e-12);
    const auto O = kernel_matrix(sigma).matrix();
    CHECK(max_abs(X * O.conjugate() * X - O) < 1e-12);
    CHECK(max_abs(O - O.adjoint()) < 1e-12);
  }
}

TEST_CASE("Haar unitaries are unitary with the right first-moment statistics") {
  Rng rng(3);
  CHECK(haar_unitary(6, rng).unitarity_defect() < 1e-12);
  // |U_11|^2 ~ Beta(1, l - 1): mean 1/l, variance (l - 1) / (l^2 (l + 1)).
  const int l = 4, draws = 10000;
  double mean = 0.0;
  for (int i = 0; i < draws; ++i) mean += std::norm(haar_unitary(l, rng).matrix()(0, 0));
  mean /= draws;
  const double sd = std::sqrt((l - 1.0) / (l * l * (l + 1.0)) / draws);
  CHECK(std::abs(mean - 1.0 / l) < 4 * sd);
}

TEST_CASE("interferometers preserve det Sigma and symplectic spectrum") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto state = random_state(4, rng, {1.0, 0.4});
    const auto U = haar_unitary(4, rng);
    const auto out = apply_interferometer(state, U);
    const Matrix S = interferometer_symplectic(U);
    const Matrix Om = symplectic_form(4);
    CHECK(max_abs(S * Om * S.transpose() - Om) < 1e-12);
    CHECK(husimi_covariance(out).determinant() ==
          doctest::Approx(husimi_covariance(state).determinant()).epsilon(1e-10));
    CHECK(max_abs(Matrix(symplectic_eigenvalues(out.covariance()) - symplectic_eigenvalues(state.covariance()))) <
          1e-9);
  }
}

TEST_CASE("mode relabeling permutes the kernel blocks") {
  Rng rng(8);
  const auto state = random_state(4, rng, {1.0, 0.2});
  const std::vector<int> perm{2, 0, 3, 1};
  const auto O = kernel_matrix(husimi_covariance(state)).matrix();
  const auto Op = kernel_matrix(husimi_covariance(permute_modes(state, perm))).matrix();
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const int pi = perm[i % 4] + (i / 4) * 4, pj = perm[j % 4] + (j / 4) * 4;
      CHECK(std::abs(Op(i, j) - O(pi, pj)) < 1e-12);
    }
}

TEST_CASE("reduce repeats rows and columns of both blocks") {
  ComplexMatrix A(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) A(i, j) = Complex(10 * i + j, 0);
  const std::vector<int> counts{3, 0, 1};
  const ComplexMatrix R = reduce(A, std::span<const int>(counts));
  REQUIRE(R.rows() == 8);
  const std::vector<int> rows{0, 0, 0, 2, 3, 3, 3, 5};
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) CHECK(R(i, j) == A(rows[i], rows[j]));

  const std::vector<int> none{0, 0, 0};
  CHECK(reduce(A, std::span<const int>(none)).rows() == 0);
}

TEST_CASE("reduce composes: a sub-multiset of a reduction is a reduction") {
  Rng rng(2);
  const ComplexMatrix A = tgbs::testing::random_symmetric(6, rng);
  const std::vector<int> outer{2, 1, 3};
  // Reduced positions: mode 1 at 0,1; mode 2 at 2; mode 3 at 3,4,5.
  const std::vector<int> inner{1, 0, 0, 1, 1, 0};
  const std::vector<int> direct{1, 0, 2};
  const ComplexMatrix twice = reduce(reduce(A, std::span<const int>(outer)), std::span<const int>(inner));
  CHECK(max_abs(twice - reduce(A, std::span<const int>(direct))) == 0.0);
}

TEST_CASE("Q function normalization and peak value") {
  const double r = 0.5;
  const std::vector<double> sq{r};
  const auto sigma = husimi_covariance(squeezed_state(sq));
  ComplexVector zero = ComplexVector::Zero(2);
  CHECK(q_function(sigma, zero) == doctest::Approx(1.0 / (std::numbers::pi * std::cosh(r))).epsilon(1e-13));

  // Integrate over alpha = a + i b with a tensor trapezoid; Gaussians make
  // this spectrally accurate.
  const int n = 241;
  const double lim = 6.0, h = 2 * lim / (n - 1);
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Complex alpha(-lim + i * h, -lim + j * h);
      ComplexVector xi(2);
      xi << alpha, std::conj(alpha);
      const double w = (i == 0 || i == n - 1 ? 0.5 : 1.0) * (j == 0 || j == n - 1 ? 0.5 : 1.0);
      total += w * q_function(sigma, xi);
    }
  CHECK(total * h * h == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("validate_state flags unphysical and ill-conditioned states") {
  CHECK(validate_state(vacuum_state(2)).physical);
  CHECK(validate_state(vacuum_state(2)).warnings.empty());

  const QuadratureState bad(Matrix::Identity(2, 2) * 0.5, Vector::Zero(2));
  const auto report = validate_state(bad);
  CHECK_FALSE(report.physical);
  CHECK(report.min_uncertainty_eigenvalue == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK_THROWS_AS(require_physical(bad), NumericalError);

  const std::vector<double> strong{5.0};
  const auto squeezed = validate_state(squeezed_state(strong));
  CHECK(squeezed.physical);
  CHECK(squeezed.covariance_condition == doctest::Approx(std::exp(20.0)).epsilon(1e-8));
  CHECK_FALSE(squeezed.warnings.empty());

  Matrix asym = Matrix::Identity(2, 2);
  asym(0, 1) = 1e-6;
  CHECK_THROWS(QuadratureState(asym, Vector::Zero(2)));
}

TEST_CASE("kernel of a random state has spectral radius below one") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto O = random_kernel(1 + trial % 5, rng).matrix();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(O, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().cwiseAbs().maxCoeff() < 1.0);
  }
}
