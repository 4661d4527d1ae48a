#pragma once

// Helpers shared by the unit tests. Randomness here comes from std::mt19937_64
// so test inputs do not depend on the library's own generator.

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <random>

#include "wcga/dictionaries.hpp"
#include "wcga/lp_space.hpp"

namespace testing_support {

using wcga::CMatrix;
using wcga::Complex;
using wcga::CVector;
using wcga::RVector;

inline Complex gaussian(std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(g);
  return {re, n(g)};
}

inline CVector gaussian_vector(std::mt19937_64& g, Eigen::Index n) {
  CVector v(n);
  for (auto& z : v) z = gaussian(g);
  return v;
}

inline CMatrix gaussian_matrix(std::mt19937_64& g, Eigen::Index r, Eigen::Index c) {
  CMatrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = gaussian(g);
  }
  return m;
}

inline std::shared_ptr<const wcga::DiscreteMeasure> uniform_measure(std::size_t m) {
  return std::make_shared<wcga::DiscreteMeasure>(
      wcga::DiscreteMeasure::empirical(wcga::detail::default_tabulation_points(m)));
}

inline wcga::SampledFunction sampled(const CVector& v) { return {v, uniform_measure(static_cast<std::size_t>(v.size()))}; }

/// Random support of size k in [0, n) plus Gaussian coefficients.
inline wcga::CoefficientVector random_sparse(std::mt19937_64& g, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), g);
  wcga::CoefficientVector a;
  for (std::size_t i = 0; i < k; ++i) a.set(idx[i], gaussian(g));
  return a;
}

/// Direct Riemann sum of |f|^p on a fine 1-d grid, independent of the
/// library quadrature.
inline double fine_grid_lp(const wcga::TrigSystem& s, const wcga::CoefficientVector& a, double p, std::size_t nodes) {
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes; ++i) {
    const double x = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(nodes);
    Complex v{};
    for (const auto& [k, c] : a) v += c * std::polar(1.0, s.frequency(k)[0] * x);
    sum += std::pow(std::abs(v), p);
  }
  return std::pow(sum / static_cast<double>(nodes), 1.0 / p);
}

}  // namespace testing_support
