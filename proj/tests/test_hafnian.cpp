#include <cmath>
#include <vector>

#include <doctest.h>

#include "test_support.hpp"
#include "tgbs/hafnian.hpp"

using namespace tgbs;
using tgbs::testing::random_kernel;
using tgbs::testing::random_symmetric;

namespace {

bool close(Complex a, Complex b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("naive hafnian on small matrices") {
  ComplexMatrix empty(0, 0);
  CHECK(hafnian_naive(empty) == Complex(1));

  Matrix A(4, 4);
  A << 0, 1, 2, 3,  //
      1, 0, 4, 5,   //
      2, 4, 0, 6,   //
      3, 5, 6, 0;
  // a01 a23 + a02 a13 + a03 a12
  CHECK(hafnian_naive(A) == doctest::Approx(1 * 6 + 2 * 5 + 3 * 4));
  CHECK(hafnian_naive(Matrix::Ones(4, 4)) == doctest::Approx(3));
  CHECK(hafnian_naive(Matrix::Ones(6, 6)) == doctest::Approx(15));
  CHECK_THROWS(hafnian_naive(Matrix::Ones(3, 3)));
}

TEST_CASE("f coefficient") {
  Matrix C = Matrix::Zero(2, 2);
  C(0, 0) = 2.0;
  C(1, 1) = 3.0;
  CHECK(f_coefficient(C, 0) == 1.0);
  CHECK(f_coefficient(C, 1) == doctest::Approx(2.5));
  // exp(g1 x + g2 x^2) at x^2: g1^2 / 2 + g2, g2 = (4 + 9) / 4.
  CHECK(f_coefficient(C, 2) == doctest::Approx(2.5 * 2.5 / 2 + 13.0 / 4));
  CHECK(f_coefficient(Matrix::Zero(4, 4), 3) == 0.0);
}

TEST_CASE("exactly one keep/parity convention reproduces the naive hafnian") {
  int matching = 0;
  for (bool keep : {true, false})
    for (bool parity : {true, false}) {
      const HafnianConvention conv{keep, parity, HafnianArrangement::kSwapped};
      bool all = true;
      Rng local(1);
      for (int trial = 0; trial < 10; ++trial) {
        const ComplexMatrix A = random_symmetric(2 * (2 + trial % 3), local);
        all = all && close(hafnian_powerset(A, conv), hafnian_naive(A), 1e-9);
      }
      if (all) ++matching;
    }
  // Complementing both the kept set and the parity describes the same sum,
  // so the two self-consistent choices come in a pair.
  CHECK(matching == 2);
  bool frozen_ok = true;
  Rng again(1);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix A = random_symmetric(2 * (2 + trial % 3), again);
    frozen_ok = frozen_ok && close(hafnian_powerset(A), hafnian_naive(A), 1e-9);
  }
  CHECK(frozen_ok);
}

TEST_CASE("power-set formula agrees with matchings, sizes 2 to 10") {
  Rng rng(7);
  for (int l = 1; l <= 5; ++l)
    for (int trial = 0; trial < 40; ++trial) {
      const ComplexMatrix A = random_symmetric(2 * l, rng);
      CHECK(close(hafnian_powerset(A), hafnian_naive(A), 1e-8));
    }
}

TEST_CASE("diagonal entries are irrelevant for the swapped arrangement only") {
  Rng rng(8);
  const ComplexMatrix A = random_symmetric(6, rng);
  ComplexMatrix B = A;
  for (int i = 0; i < 6; ++i) B(i, i) += Complex(1.7 + i, -0.3 * i);
  CHECK(hafnian_naive(A) == hafnian_naive(B));
  CHECK(close(hafnian_powerset(A), hafnian_powerset(B), 1e-10));

  const HafnianConvention wrong{true, true, HafnianArrangement::kUnswapped};
  CHECK_FALSE(close(hafnian_powerset(A, wrong), hafnian_powerset(B, wrong), 1e-6));
}

TEST_CASE("hafnian is invariant under simultaneous permutation") {
  Rng rng(9);
  const ComplexMatrix A = random_symmetric(8, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> P(8);
  P.indices() << 3, 7, 1, 0, 6, 2, 5, 4;
  const ComplexMatrix B = P * A * P.transpose();
  CHECK(close(hafnian_naive(B), hafnian_naive(A), 1e-12));
  CHECK(close(hafnian_powerset(B), hafnian_naive(A), 1e-9));
}

TEST_CASE("repeated rows match the expanded matrix") {
  Rng rng(10);
  const std::vector<std::vector<int>> cases{{2, 0, 1}, {3, 1, 0}, {1, 1, 2}, {4, 0, 0}, {2, 2, 2}, {0, 0, 0}};
  for (const auto& reps : cases) {
    const ComplexMatrix A = random_symmetric(6, rng);
    const ComplexMatrix expanded = reduce(A, std::span<const int>(reps));
    CHECK(close(hafnian_repeated<double>(A, reps), hafnian_naive(expanded), 1e-9));
  }
}

TEST_CASE("Haf(XO) of a physical kernel is real and equals the eta^l coefficient of Tor(eta O)") {
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const int l = 1 + trial % 5;
    const auto O = random_kernel(l, rng, 1.0, 0.3).matrix();
    const ComplexMatrix XO = block_swap(l) * O;
    const Complex haf = hafnian_naive(XO);
    CHECK(std::abs(haf.imag()) < 1e-10 * std::max(1.0, std::abs(haf)));
    CHECK(hafnian_from_torontonian<double>(O) == doctest::Approx(haf.real()).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("bridge on a two-mode squeezed vacuum") {
  // TMSV kernel: O couples alpha_1 with alpha_2^* with amplitude tanh r, so
  // Haf(XO) = tanh^2 r.
  const double t = std::tanh(0.6);
  ComplexMatrix O = ComplexMatrix::Zero(4, 4);
  O(0, 3) = O(3, 0) = O(1, 2) = O(2, 1) = t;
  CHECK(hafnian_naive(ComplexMatrix(block_swap(2) * O)).real() == doctest::Approx(t * t));
  CHECK(hafnian_from_torontonian<double>(O) == doctest::Approx(t * t).epsilon(1e-12));

  const std::vector<double> sq{0.6};
  const auto single = kernel_matrix(husimi_covariance(squeezed_state(sq)));
  CHECK(std::abs(hafnian_from_torontonian(single)) < 1e-14);
  CHECK(std::abs(hafnian_naive(ComplexMatrix(block_swap(1) * single.matrix()))) < 1e-14);
}

TEST_CASE("input checks") {
  CHECK_THROWS(hafnian_powerset<double>(ComplexMatrix::Ones(3, 3)));
  ComplexMatrix A = ComplexMatrix::Zero(2, 2);
  A(0, 1) = 1.0;
  CHECK_THROWS(hafnian_powerset<double>(A));
  CHECK_THROWS(hafnian_naive(ComplexMatrix::Ones(18, 18)));
}

TEST_CASE("matching recursion over multiplicities") {
  Rng rng(12);
  const std::vector<std::vector<int>> cases{{2, 0, 1}, {3, 1, 0}, {1, 1, 2}, {4, 0, 0}, {2, 2, 2}, {0, 0, 0}, {1, 1, 1}};
  for (const auto& reps : cases) {
    const ComplexMatrix A = random_symmetric(6, rng);
    const Complex expected = hafnian_naive(ComplexMatrix(reduce(A, std::span<const int>(reps))));
    CHECK(close(hafnian_multiset<double>(A, reps), expected, 1e-11));
  }
  // Moderate repetition, where the power-set sum is still accurate.
  const auto O = random_kernel(3, rng, 0.5, 0.1).matrix();
  const ComplexMatrix XO = block_swap(3) * O;
  const std::vector<int> reps{3, 4, 2};
  CHECK(close(hafnian_multiset<double>(XO, reps), hafnian_repeated<double>(XO, reps), 1e-8));
}
