#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wcga {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Error taxonomy. Everything derives from std::runtime_error so callers
// that do not care can catch one type.

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IndexError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a norming functional is requested for a (numerically) zero
/// element. Greedy drivers treat it as termination.
struct ZeroResidual : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Combinatorial enumeration refused: C(N, v) exceeds the configured cap.
struct CapExceeded : std::runtime_error {
  CapExceeded(double required, double cap)
      : std::runtime_error("enumeration needs " + std::to_string(required) +
                           " supports, cap is " + std::to_string(cap)),
        required_cap(required), configured_cap(cap) {}
  double required_cap;
  double configured_cap;
};

/// Projection failed to certify its dual optimality residual. Carries the
/// last iterate so callers can still inspect it.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, CVector last, double dual)
      : std::runtime_error(what), last_iterate(std::move(last)),
        dual_residual(dual) {}
  CVector last_iterate;
  double dual_residual;
};

/// Number of k-subsets of an n-set as a double (no overflow for large n).
inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return r;
}

}  // namespace wcga
