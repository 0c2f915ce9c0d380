#include "tgbs/random.hpp"

#include <cmath>
#include <numbers>

namespace tgbs {

ComplexUnitary haar_unitary(int dimension, Rng& rng) {
  if (dimension < 1) throw std::invalid_argument("haar_unitary: dimension must be positive");
  ComplexMatrix Z(dimension, dimension);
  for (int j = 0; j < dimension; ++j)
    for (int i = 0; i < dimension; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      Z(i, j) = Complex(re, im) * (1.0 / std::numbers::sqrt2);
    }
  Eigen::HouseholderQR<ComplexMatrix> qr(Z);
  ComplexMatrix Q = qr.householderQ();
  const ComplexMatrix& R = qr.matrixQR();
  for (int j = 0; j < dimension; ++j) {
    const Complex d = R(j, j);
    const double mag = std::abs(d);
    Q.col(j) *= mag > 0.0 ? d / mag : Complex(1.0);
  }
  return ComplexUnitary(std::move(Q), 1e-12);
}

QuadratureState random_state(int modes, Rng& rng, const RandomStateOptions& options) {
  if (modes < 1) throw std::invalid_argument("random_state: need at least one mode");
  Vector diag(2 * modes);
  for (int k = 0; k < modes; ++k) {
    const double r = options.max_squeezing * rng.uniform();
    const double nu = 1.0 + 2.0 * options.max_thermal * rng.uniform();
    diag(k) = nu * std::exp(2.0 * r);
    diag(k + modes) = nu * std::exp(-2.0 * r);
  }
  const QuadratureState product(diag.asDiagonal(), Vector::Zero(2 * modes));
  return apply_interferometer(product, haar_unitary(modes, rng));
}

}  // namespace tgbs
