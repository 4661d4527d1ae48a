#pragma once

// Adversarial search for the extremes of a ratio of two norms of a sparse
// expansion, ||M_num c|| / (scale * ||M_den c||), over coefficient vectors c
// supported on randomly drawn index sets. Used to certify discretization,
// RIP, incoherence and unconditionality constants from below.
//
// Refinement is cyclic coordinate ascent: each complex coordinate is
// re-optimized by a 16-point phase sweep with a golden-section search on the
// modulus. When both norms are L_2 norms the per-support extremes are
// generalized eigenvalues and are computed exactly instead.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "wcga/core.hpp"
#include "wcga/lp_space.hpp"
#include "wcga/parallel.hpp"
#include "wcga/rng.hpp"

namespace wcga {

/// c -> (sum_r w_r |(M c)_r|^p)^{1/p}; `map` has one column per support slot.
struct LinearNorm {
  CMatrix map;
  RVector weights;
  double p = 2.0;

  [[nodiscard]] double of_image(const CVector& y) const { return weighted_lp_norm(y, weights, p); }
  [[nodiscard]] double operator()(const CVector& c) const { return of_image(map * c); }
  /// map^H W map; meaningful for p = 2 only.
  [[nodiscard]] CMatrix gram() const { return map.adjoint() * weights.asDiagonal() * map; }

  static LinearNorm identity(std::size_t n, double p = 2.0) {
    const auto k = static_cast<Eigen::Index>(n);
    return {CMatrix::Identity(k, k), RVector::Ones(k), p};
  }
};

/// One random draw: outer support B (global indices), optionally the
/// positions within B of an inner subset A, and a per-trial scale.
struct TrialSupport {
  std::vector<std::size_t> outer;
  std::vector<std::size_t> inner;  // positions into `outer`
  double scale = 1.0;
};

struct RatioProblem {
  std::function<TrialSupport(CounterRng&)> draw_support;
  std::function<LinearNorm(const TrialSupport&)> numerator;
  std::function<LinearNorm(const TrialSupport&)> denominator;
  /// Optional Gram matrices for the exact L_2 path; when absent the Gram is
  /// formed from the LinearNorm (requires p = 2 on that side).
  std::function<CMatrix(const TrialSupport&)> numerator_gram;
  std::function<CMatrix(const TrialSupport&)> denominator_gram;
  /// Both sides are L_2 norms, so extremes per support are eigenvalues.
  bool quadratic = false;
};

struct SearchOptions {
  std::size_t trials = 100;
  std::size_t refine_cycles = 3;
  std::uint64_t seed = 0;
  /// Stream tag; searches sharing (seed, tag) draw identical supports and
  /// starting coefficients.
  std::uint64_t stream = 0;
  bool exact_quadratic = true;
  bool want_max = true;
  bool want_min = true;
};

struct Extremum {
  double value = std::numeric_limits<double>::quiet_NaN();
  std::size_t trial = 0;
  TrialSupport support;
  CVector coeffs;  // aligned with support.outer
  [[nodiscard]] bool found() const { return !std::isnan(value); }
};

struct RatioExtremes {
  Extremum max;
  Extremum min;
  std::size_t trials = 0;
};

namespace detail {

class CoordinateAscent {
 public:
  CoordinateAscent(const LinearNorm& num, const LinearNorm& den, double scale, bool maximize)
      : num_(num), den_(den), scale_(scale), sign_(maximize ? 1.0 : -1.0) {}

  /// Ratio value, or NaN when both sides vanish.
  [[nodiscard]] double ratio(const CVector& ynum, const CVector& yden) const {
    const double n = num_.of_image(ynum);
    const double d = den_.of_image(yden);
    if (d == 0.0) return n == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
    return n / (scale_ * d);
  }

  void run(CVector& c, std::size_t cycles) {
    CVector ynum = num_.map * c;
    CVector yden = den_.map * c;
    double best = ratio(ynum, yden);
    static constexpr int kPhases = 16;
    for (std::size_t cycle = 0; cycle < cycles; ++cycle) {
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        const Complex old = c[i];
        const double rho_max = 2.0 * std::max(c.norm(), 1e-300);
        const auto ncol = num_.map.col(i);
        const auto dcol = den_.map.col(i);
        auto eval = [&](Complex z) {
          return sign_ * ratio(ynum + (z - old) * ncol, yden + (z - old) * dcol);
        };
        Complex best_z = old;
        double best_val = sign_ * best;
        if (std::isnan(best_val)) best_val = -std::numeric_limits<double>::infinity();
        auto consider = [&](Complex z) {
          const double v = eval(z);
          if (!std::isnan(v) && v > best_val) {
            best_val = v;
            best_z = z;
          }
        };
        for (int k = 0; k < kPhases; ++k) {
          const Complex dir = std::polar(1.0, kTwoPi * k / kPhases);
          // golden section on [0, rho_max] for modulus along dir
          constexpr double g = 0.61803398874989484820;
          double a = 0.0, b = rho_max;
          double x1 = b - g * (b - a), x2 = a + g * (b - a);
          double f1 = eval(x1 * dir), f2 = eval(x2 * dir);
          for (int it = 0; it < 40; ++it) {
            if (std::isnan(f1)) f1 = -std::numeric_limits<double>::infinity();
            if (std::isnan(f2)) f2 = -std::numeric_limits<double>::infinity();
            if (f1 < f2) {
              a = x1; x1 = x2; f1 = f2;
              x2 = a + g * (b - a); f2 = eval(x2 * dir);
            } else {
              b = x2; x2 = x1; f2 = f1;
              x1 = b - g * (b - a); f1 = eval(x1 * dir);
            }
          }
          consider(0.5 * (a + b) * dir);
          consider(rho_max * dir);
        }
        consider(Complex{});
        if (best_z != old) {
          ynum += (best_z - old) * ncol;
          yden += (best_z - old) * dcol;
          c[i] = best_z;
          best = sign_ * best_val;
        }
      }
      const double nrm = c.norm();
      if (nrm > 0.0) {
        c /= nrm;
        ynum /= nrm;
        yden /= nrm;
      }
    }
  }

 private:
  const LinearNorm& num_;
  const LinearNorm& den_;
  double scale_;
  double sign_;
};

inline bool better(double candidate, double incumbent, bool maximize) {
  if (std::isnan(candidate)) return false;
  if (std::isnan(incumbent)) return true;
  return maximize ? candidate > incumbent : candidate < incumbent;
}

}  // namespace detail

/// Value of the ratio for explicit coefficients on a trial support.
inline double evaluate_ratio(const RatioProblem& problem, const TrialSupport& s, const CVector& c) {
  const LinearNorm num = problem.numerator(s);
  const LinearNorm den = problem.denominator(s);
  const double d = den(c);
  return num(c) / (s.scale * d);
}

/// Runs `trials` independent draws and returns the largest and smallest ratio
/// found. Trial t depends only on (seed, stream, t), so doubling the trial
/// count searches a superset and never loses an extreme.
inline RatioExtremes search_ratio(const RatioProblem& problem, const SearchOptions& opts) {
  struct TrialResult {
    Extremum max, min;
  };
  std::vector<TrialResult> results(opts.trials);
  parallel_for(opts.trials, [&](std::size_t t) {
    CounterRng rng(opts.seed, {opts.stream, t});
    TrialSupport s = problem.draw_support(rng);
    const auto n = static_cast<Eigen::Index>(s.outer.size());
    CVector c0(n);
    for (Eigen::Index i = 0; i < n; ++i) c0[i] = rng.complex_normal();
    if (c0.norm() > 0.0) c0.normalize();
    auto& out = results[t];

    if (problem.quadratic && opts.exact_quadratic) {
      const CMatrix gn = problem.numerator_gram ? problem.numerator_gram(s) : problem.numerator(s).gram();
      const CMatrix gd = problem.denominator_gram ? problem.denominator_gram(s) : problem.denominator(s).gram();
      Eigen::GeneralizedSelfAdjointEigenSolver<CMatrix> es(gn, gd, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
      if (es.info() == Eigen::Success) {
        const auto& ev = es.eigenvalues();
        const auto last = ev.size() - 1;
        const double sc = s.scale;
        out.max = {std::sqrt(std::max(ev[last], 0.0)) / sc, t, s, es.eigenvectors().col(last).normalized()};
        out.min = {std::sqrt(std::max(ev[0], 0.0)) / sc, t, s, es.eigenvectors().col(0).normalized()};
        return;
      }
      // denominator Gram not positive definite: fall through to the search
    }
    const LinearNorm num = problem.numerator(s);
    const LinearNorm den = problem.denominator(s);
    if (opts.want_max) {
      CVector c = c0;
      detail::CoordinateAscent(num, den, s.scale, true).run(c, opts.refine_cycles);
      out.max = {num(c) / (s.scale * den(c)), t, s, c};
    }
    if (opts.want_min) {
      CVector c = c0;
      detail::CoordinateAscent(num, den, s.scale, false).run(c, opts.refine_cycles);
      out.min = {num(c) / (s.scale * den(c)), t, s, c};
    }
  });

  RatioExtremes ext;
  ext.trials = opts.trials;
  for (auto& r : results) {
    if (opts.want_max && detail::better(r.max.value, ext.max.value, true)) ext.max = std::move(r.max);
    if (opts.want_min && detail::better(r.min.value, ext.min.value, false)) ext.min = std::move(r.min);
  }
  return ext;
}

}  // namespace wcga
