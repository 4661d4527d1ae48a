#pragma once

// Discrete L_p spaces on the d-torus: point sets, probability measures with
// finite support, sampled functions, norms and norming functionals.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wcga/core.hpp"

namespace wcga {

/// m points in [0, 2pi)^d, stored row-major.
class PointSet {
 public:
  PointSet() = default;

  PointSet(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
    if (dim_ == 0) throw ParameterError("point set dimension must be positive");
    if (coords_.size() % dim_ != 0) throw DimensionError("coordinate count is not a multiple of dim");
    if (coords_.empty()) throw ParameterError("point set must contain at least one point");
    for (double x : coords_) {
      if (!(x >= 0.0 && x < kTwoPi)) throw ParameterError("coordinate outside [0, 2pi)");
    }
  }

  /// Tensor grid with `per_axis` equispaced nodes 2pi*i/n on each axis.
  static PointSet uniform_grid(std::size_t dim, std::size_t per_axis) {
    if (per_axis == 0) throw ParameterError("grid needs at least one node per axis");
    std::size_t total = 1;
    for (std::size_t i = 0; i < dim; ++i) total *= per_axis;
    std::vector<double> coords(total * dim);
    const double h = kTwoPi / static_cast<double>(per_axis);
    for (std::size_t p = 0; p < total; ++p) {
      std::size_t rest = p;
      // last axis varies fastest
      for (std::size_t a = dim; a-- > 0;) {
        coords[p * dim + a] = h * static_cast<double>(rest % per_axis);
        rest /= per_axis;
      }
    }
    return PointSet(dim, std::move(coords));
  }

  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  [[nodiscard]] std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  [[nodiscard]] const std::vector<double>& coords() const { return coords_; }

  /// Points of *this followed by points of other.
  [[nodiscard]] PointSet concat(const PointSet& other) const {
    if (other.dim_ != dim_) throw DimensionError("cannot concatenate point sets of different dim");
    std::vector<double> c = coords_;
    c.insert(c.end(), other.coords_.begin(), other.coords_.end());
    return PointSet(dim_, std::move(c));
  }

  bool operator==(const PointSet&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

/// Probability measure with finite support.
class DiscreteMeasure {
 public:
  enum class Kind { empirical, quadrature, mixed };

  DiscreteMeasure(PointSet support, RVector weights, Kind kind = Kind::empirical)
      : support_(std::move(support)), weights_(std::move(weights)), kind_(kind) {
    if (static_cast<std::size_t>(weights_.size()) != support_.size()) {
      throw DimensionError("weights and support differ in length");
    }
    if ((weights_.array() < 0.0).any()) throw ParameterError("negative weight");
    if (std::abs(weights_.sum() - 1.0) > 1e-12) throw ParameterError("weights do not sum to 1");
  }

  /// mu_m: weight 1/m on every point.
  static DiscreteMeasure empirical(PointSet points) {
    const auto m = static_cast<Eigen::Index>(points.size());
    return {std::move(points), RVector::Constant(m, 1.0 / static_cast<double>(m)), Kind::empirical};
  }

  /// Equal-weight tensor grid; exact for trigonometric polynomials of degree
  /// below per_axis in each variable.
  static DiscreteMeasure quadrature(std::size_t dim, std::size_t per_axis) {
    auto grid = PointSet::uniform_grid(dim, per_axis);
    const auto n = static_cast<Eigen::Index>(grid.size());
    return {std::move(grid), RVector::Constant(n, 1.0 / static_cast<double>(n)), Kind::quadrature};
  }

  /// (1 - lambda) * a + lambda * b on the concatenated support. With a the
  /// quadrature grid and b the sample points this is mu_xi = (mu + mu_m)/2.
  static DiscreteMeasure mixture(const DiscreteMeasure& a, const DiscreteMeasure& b,
                                 double lambda = 0.5) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("mixture weight outside [0,1]");
    RVector w(a.weights_.size() + b.weights_.size());
    w << (1.0 - lambda) * a.weights_, lambda * b.weights_;
    DiscreteMeasure out(a.support_.concat(b.support_), std::move(w), Kind::mixed);
    out.first_component_ = a.size();
    return out;
  }

  [[nodiscard]] const PointSet& support() const { return support_; }
  [[nodiscard]] const RVector& weights() const { return weights_; }
  [[nodiscard]] std::size_t size() const { return support_.size(); }
  [[nodiscard]] Kind kind() const { return kind_; }
  /// For mixed measures: number of support points owned by the first component.
  [[nodiscard]] std::size_t first_component_size() const { return first_component_; }

 private:
  PointSet support_;
  RVector weights_;
  Kind kind_;
  std::size_t first_component_ = 0;
};

using MeasurePtr = std::shared_ptr<const DiscreteMeasure>;

/// Function values on the support of a measure.
class SampledFunction {
 public:
  SampledFunction(CVector values, MeasurePtr measure)
      : values_(std::move(values)), measure_(std::move(measure)) {
    if (!measure_) throw ParameterError("sampled function needs a measure");
    if (static_cast<std::size_t>(values_.size()) != measure_->size()) {
      throw DimensionError("value count does not match measure support");
    }
  }

  [[nodiscard]] const CVector& values() const { return values_; }
  [[nodiscard]] const MeasurePtr& measure() const { return measure_; }
  [[nodiscard]] const RVector& weights() const { return measure_->weights(); }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  [[nodiscard]] SampledFunction with_values(CVector v) const { return {std::move(v), measure_}; }

 private:
  CVector values_;
  MeasurePtr measure_;
};

/// Exponent p in [1, inf) with p* = min(p, 2) and q* = p*/(p* - 1).
class LpExponent {
 public:
  LpExponent(double p) : p_(p) {  // NOLINT(google-explicit-constructor)
    if (!(p >= 1.0) || !std::isfinite(p)) throw ParameterError("L_p exponent must be finite and >= 1");
  }
  [[nodiscard]] double p() const { return p_; }
  [[nodiscard]] double p_star() const { return std::min(p_, 2.0); }
  /// +inf for p = 1.
  [[nodiscard]] double q_star() const {
    const double ps = p_star();
    return ps == 1.0 ? std::numeric_limits<double>::infinity() : ps / (ps - 1.0);
  }
  operator double() const { return p_; }  // NOLINT(google-explicit-constructor)

 private:
  double p_;
};

/// (sum_nu w_nu |x_nu|^p)^{1/p}, scaled by max|x| to avoid over/underflow.
inline double weighted_lp_norm(const CVector& x, const RVector& w, double p) {
  if (x.size() != w.size()) throw DimensionError("values and weights differ in length");
  if (x.size() == 0) return 0.0;
  const double scale = x.cwiseAbs().maxCoeff();
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  if (p == 2.0) {
    return scale * std::sqrt((w.array() * (x.array() / scale).abs2()).sum());
  }
  const double s = (w.array() * (x.array().abs() / scale).pow(p)).sum();
  return scale * std::pow(s, 1.0 / p);
}

inline double lp_norm(const SampledFunction& f, LpExponent p) {
  return weighted_lp_norm(f.values(), f.weights(), p.p());
}

/// max over samples; provided for sigma_v(f)_inf style comparisons.
inline double sup_norm(const SampledFunction& f) {
  return f.size() == 0 ? 0.0 : f.values().cwiseAbs().maxCoeff();
}

/// Kernel k of the norming functional of f: F_f(g) = sum_nu k_nu g_nu, where
/// k_nu = w_nu |f_nu|^{p-2} conj(f_nu) / ||f||_p^{p-1}. For p = 1 the
/// subgradient choice sign(conj f) with 0 at zeros is used.
inline CVector norming_kernel(const CVector& f, const RVector& w, double p) {
  const double norm = weighted_lp_norm(f, w, p);
  if (!(norm > 0.0)) throw ZeroResidual("norming functional of a zero element");
  CVector k(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const Complex s = f[i] / norm;
    const double a = std::abs(s);
    if (a == 0.0) {
      k[i] = 0.0;
    } else if (p == 2.0) {
      k[i] = w[i] * std::conj(s);
    } else {
      k[i] = w[i] * std::pow(a, p - 1.0) * std::conj(s) / a;
    }
  }
  return k;
}

inline CVector norming_kernel(const SampledFunction& f, LpExponent p) {
  return norming_kernel(f.values(), f.weights(), p.p());
}

/// F_f(g) for the L_p(measure) norming functional of f.
inline Complex norming_functional_apply(const SampledFunction& f, const SampledFunction& g,
                                        LpExponent p) {
  if (f.size() != g.size()) throw DimensionError("functional and argument differ in length");
  return (norming_kernel(f, p).array() * g.values().array()).sum();
}

/// Norm in L_p(mu_xi), mu_xi = (mu + mu_m)/2, with the mu part given on a
/// quadrature grid and the mu_m part on the sample points.
inline double mixed_measure_norm(const SampledFunction& f_grid, const SampledFunction& f_points,
                                 LpExponent p) {
  const double a = lp_norm(f_grid, p);
  const double b = lp_norm(f_points, p);
  const double hi = std::max(a, b);
  if (hi == 0.0) return 0.0;
  const double s = 0.5 * (std::pow(a / hi, p.p()) + std::pow(b / hi, p.p()));
  return hi * std::pow(s, 1.0 / p.p());
}

}  // namespace wcga
