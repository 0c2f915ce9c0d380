#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tgbs {

template <typename Real>
using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using Matrix = RMatrix<double>;
using Vector = RVector<double>;
using ComplexMatrix = CMatrix<double>;
using ComplexVector = CVector<double>;
using Complex = std::complex<double>;

/// Base of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-physical input, failed factorization, or a probability outside its
/// clamp band. The CLI maps these to exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed file or unreadable input. The CLI maps these to exit code 3.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Set of modes where a threshold detector clicked. Modes are numbered
/// 1..modes and kept strictly increasing.
class ClickPattern {
 public:
  ClickPattern() = default;
  ClickPattern(int modes, std::vector<int> clicked);

  /// Pattern whose bit k (0-based) marks a click on mode k+1.
  static ClickPattern from_mask(int modes, std::uint64_t mask);

  int modes() const { return modes_; }
  const std::vector<int>& clicked() const { return clicked_; }
  std::size_t size() const { return clicked_.size(); }
  bool empty() const { return clicked_.empty(); }
  bool contains(int mode) const;
  std::uint64_t mask() const;

  friend bool operator==(const ClickPattern&, const ClickPattern&) = default;

 private:
  int modes_ = 0;
  std::vector<int> clicked_;
};

/// Photon-number-resolving outcome: counts[k] photons in mode k+1.
class PNRPattern {
 public:
  PNRPattern() = default;
  explicit PNRPattern(std::vector<int> counts);

  static PNRPattern from_clicks(const ClickPattern& pattern);

  int modes() const { return static_cast<int>(counts_.size()); }
  const std::vector<int>& counts() const { return counts_; }
  int total() const;
  bool has_collision() const;

  friend bool operator==(const PNRPattern&, const PNRPattern&) = default;

 private:
  std::vector<int> counts_;
};

}  // namespace tgbs
