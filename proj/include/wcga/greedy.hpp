#pragma once

// Weak Chebyshev Greedy Algorithm over discrete L_p spaces, the Chebyshev
// (best approximation) step, iteration budgets, the block greedy v-term
// approximant and brute-force best v-term oracles.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "wcga/core.hpp"
#include "wcga/dictionaries.hpp"
#include "wcga/lp_space.hpp"
#include "wcga/parallel.hpp"

namespace wcga {

/// Residual norms below this multiple of ||f0|| count as exact zero.
inline constexpr double kZeroResidual = 1e-13;

/// A dictionary restricted to the support of a measure: column i holds g_i.
struct SampledSystem {
  CMatrix values;  // m x N
  MeasurePtr measure;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(values.cols()); }
  [[nodiscard]] std::size_t points() const { return static_cast<std::size_t>(values.rows()); }
  [[nodiscard]] const RVector& weights() const { return measure->weights(); }

  [[nodiscard]] SampledFunction synthesize(const CoefficientVector& a) const {
    check_indices(a, size());
    CVector out = CVector::Zero(values.rows());
    for (const auto& [i, c] : a) out += c * values.col(static_cast<Eigen::Index>(i));
    return {std::move(out), measure};
  }
};

inline SampledSystem restrict_system(const TrigSystem& system, MeasurePtr measure) {
  return {system.sample(measure->support()), std::move(measure)};
}

/// Tabulated system on its own points with the empirical measure.
inline SampledSystem restrict_system(const TabulatedSystem& system) {
  return {system.sample(), std::make_shared<DiscreteMeasure>(DiscreteMeasure::empirical(system.points()))};
}

// ---------------------------------------------------------------------------
// Chebyshev step

struct ProjectionOptions {
  double tol = 1e-9;
  std::size_t max_iter = 500;
  double weight_floor = 1e-12;
};

struct ProjectionResult {
  CVector coefficients;
  CVector residual;
  double residual_norm = 0.0;
  /// max_i |F_res(g_i)| / max_i ||g_i||_p; 0 for p = 2 or an exact fit.
  double dual_residual = 0.0;
  std::size_t iterations = 0;
};

namespace detail {

inline double lp_objective(const CVector& r, const RVector& w, double p) {
  return (w.array() * r.array().abs().pow(p)).sum();
}

inline CVector weighted_least_squares(const CMatrix& A, const CVector& f, const RVector& w) {
  const RVector sw = w.cwiseSqrt();
  const CMatrix As = sw.asDiagonal() * A;
  const CVector fs = sw.asDiagonal() * f;
  return Eigen::CompleteOrthogonalDecomposition<CMatrix>(As).solve(fs);
}

/// Stack of the real 2 x 2k Jacobians of c -> a_nu c, one pair of rows per point.
inline Eigen::MatrixXd real_jacobian(const CMatrix& A) {
  const Eigen::Index m = A.rows(), k = A.cols();
  Eigen::MatrixXd R(2 * m, 2 * k);
  for (Eigen::Index nu = 0; nu < m; ++nu) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const double re = A(nu, i).real(), im = A(nu, i).imag();
      R(2 * nu, i) = re;
      R(2 * nu, k + i) = -im;
      R(2 * nu + 1, i) = im;
      R(2 * nu + 1, k + i) = re;
    }
  }
  return R;
}

inline double dual_residual(const CMatrix& A, const CVector& r, const RVector& w, double p, double gmax) {
  const CVector k = norming_kernel(r, w, p);
  const CVector F = A.transpose() * k;
  return F.cwiseAbs().maxCoeff() / gmax;
}

/// Minimizes phi(s) = sum w |r - s y|^p over s >= 0 by golden section,
/// growing the bracket while the minimum sits on its right end.
inline double line_search(const CVector& r, const CVector& y, const RVector& w, double p, double* value) {
  auto phi = [&](double s) { return lp_objective(r - s * y, w, p); };
  double hi = 2.0;
  for (int grow = 0; grow < 6 && phi(hi) < phi(0.5 * hi); ++grow) hi *= 4.0;
  constexpr double g = 0.61803398874989484820;
  double a = 0.0, b = hi;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = phi(x1), f2 = phi(x2);
  for (int it = 0; it < 80 && b - a > 1e-15 * hi; ++it) {
    if (f1 > f2) {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + g * (b - a); f2 = phi(x2);
    } else {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - g * (b - a); f1 = phi(x1);
    }
  }
  double best_s = f1 < f2 ? x1 : x2;
  double best = std::min(f1, f2);
  if (const double one = phi(1.0); one <= best) {
    best = one;
    best_s = 1.0;
  }
  *value = best;
  return best_s;
}

}  // namespace detail

/// Best approximation of f from span(columns of A) in L_p(w). p = 2 is a
/// weighted least-squares solve. Otherwise damped Newton iterations on
/// sum w|r|^p (IRLS weights w|r|^{p-2} plus the rank-one curvature term),
/// each followed by a golden-section line search, starting from the L_2
/// solution; the plain IRLS direction is the fallback when Newton stalls.
/// Convergence is certified by the dual residual of the norming functional.
inline ProjectionResult project_columns(const CMatrix& A, const CVector& f, const RVector& w, double p,
                                        const ProjectionOptions& opts = {}) {
  static_cast<void>(LpExponent{p});
  if (A.rows() != f.size() || w.size() != f.size()) throw DimensionError("projection operands differ in length");
  ProjectionResult out;
  const Eigen::Index k = A.cols();
  if (k == 0) {
    out.coefficients = CVector(0);
    out.residual = f;
    out.residual_norm = weighted_lp_norm(f, w, p);
    return out;
  }
  const double scale = f.cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    out.coefficients = CVector::Zero(k);
    out.residual = f;
    return out;
  }
  const CVector fs = f / scale;
  CVector c = detail::weighted_least_squares(A, fs, w);
  CVector r = fs - A * c;
  const double fs_norm = weighted_lp_norm(fs, w, p);

  auto finish = [&](double dual) {
    out.coefficients = c * scale;
    out.residual = r * scale;
    out.residual_norm = weighted_lp_norm(out.residual, w, p);
    out.dual_residual = dual;
    return out;
  };
  if (p == 2.0) return finish(0.0);

  double gmax = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) gmax = std::max(gmax, weighted_lp_norm(A.col(i), w, p));
  const Eigen::MatrixXd R = detail::real_jacobian(A);
  const Eigen::Index m = A.rows();
  double phi = detail::lp_objective(r, w, p);
  double dual = std::numeric_limits<double>::infinity();

  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    out.iterations = it;
    if (weighted_lp_norm(r, w, p) <= kZeroResidual * fs_norm) return finish(0.0);
    dual = detail::dual_residual(A, r, w, p, gmax);
    if (dual <= opts.tol) return finish(dual);

    const double rmax = r.cwiseAbs().maxCoeff();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * k);
    Eigen::MatrixXd T(2 * m, 2 * k);
    Eigen::MatrixXd Tirls(2 * m, 2 * k);
    const double bend = std::sqrt(std::max(p - 1.0, 0.0)) - 1.0;
    for (Eigen::Index nu = 0; nu < m; ++nu) {
      const double a = std::abs(r[nu]);
      const double ae = std::max(a, opts.weight_floor * rmax);
      const double omega = w[nu] * p * std::pow(ae, p - 2.0);
      const double so = std::sqrt(omega);
      const auto M = R.middleRows(2 * nu, 2);
      Eigen::Vector2d zeta(r[nu].real(), r[nu].imag());
      rhs.noalias() += omega * M.transpose() * zeta;
      Eigen::Matrix2d B = Eigen::Matrix2d::Identity();
      if (a > 0.0) {
        const Eigen::Vector2d u = zeta / a;
        B += bend * u * u.transpose();
      }
      T.middleRows(2 * nu, 2) = so * B * M;
      Tirls.middleRows(2 * nu, 2) = so * M;
    }
    bool moved = false;
    for (const Eigen::MatrixXd* Tm : {&T, &Tirls}) {
      const Eigen::MatrixXd H = Tm->transpose() * *Tm;
      const Eigen::VectorXd dx = H.ldlt().solve(rhs);
      if (!dx.allFinite()) continue;
      CVector dc(k);
      for (Eigen::Index i = 0; i < k; ++i) dc[i] = {dx[i], dx[k + i]};
      const CVector y = A * dc;
      double value = 0.0;
      const double s = detail::line_search(r, y, w, p, &value);
      if (value < phi) {
        c += s * dc;
        r = fs - A * c;
        phi = detail::lp_objective(r, w, p);
        moved = true;
        break;
      }
      // Near the optimum phi is flat to rounding; a full step is still
      // accepted when it shrinks the dual residual.
      const CVector r_full = fs - A * (c + dc);
      if (weighted_lp_norm(r_full, w, p) > 0.0 && detail::dual_residual(A, r_full, w, p, gmax) < dual) {
        c += dc;
        r = r_full;
        phi = detail::lp_objective(r, w, p);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  out.iterations = opts.max_iter;
  if (weighted_lp_norm(r, w, p) <= kZeroResidual * fs_norm) return finish(0.0);
  dual = detail::dual_residual(A, r, w, p, gmax);
  // L_1 is not smooth: its optimum need not zero the functional, so a
  // stalled descent is accepted as the answer.
  if (dual <= opts.tol || p == 1.0) return finish(dual);
  throw ConvergenceError("L_p projection did not reach the dual tolerance", c * scale, dual);
}

struct SpanProjection {
  CoefficientVector coefficients;
  SampledFunction residual;
  double residual_norm;
  double dual_residual;
};

inline CMatrix select_columns(const CMatrix& values, const std::vector<std::size_t>& indices) {
  CMatrix A(values.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t c = 0; c < indices.size(); ++c) {
    if (indices[c] >= static_cast<std::size_t>(values.cols())) throw IndexError("dictionary index out of range");
    A.col(static_cast<Eigen::Index>(c)) = values.col(static_cast<Eigen::Index>(indices[c]));
  }
  return A;
}

inline SpanProjection lp_span_projection(const SampledFunction& f0, const SampledSystem& system,
                                         const std::vector<std::size_t>& indices, LpExponent p,
                                         const ProjectionOptions& opts = {}) {
  if (f0.size() != system.points()) throw DimensionError("function and system live on different supports");
  auto sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ParameterError("indices must be distinct");
  const auto res = project_columns(select_columns(system.values, indices), f0.values(), f0.weights(), p, opts);
  return {CoefficientVector::from_support(indices, res.coefficients), f0.with_values(res.residual), res.residual_norm,
          res.dual_residual};
}

// ---------------------------------------------------------------------------
// WCGA

struct GreedyStep {
  std::size_t selected = 0;
  Complex functional_value;     // F_{f_{m-1}}(phi_m)
  double functional_max = 0.0;  // sup_g |F_{f_{m-1}}(g)|
  double residual_norm = 0.0;   // ||f_m||
  bool reselected = false;
  CoefficientVector coefficients;  // of G_m
};

struct GreedyTrace {
  double initial_norm = 0.0;
  double p = 2.0;
  double t = 1.0;
  std::vector<GreedyStep> steps;
  bool exact = false;  // residual reached numerical zero
  CVector residual;    // f_u on the measure support (empty for the Gram form)

  [[nodiscard]] std::vector<std::size_t> selected() const {
    std::vector<std::size_t> s;
    for (const auto& st : steps) s.push_back(st.selected);
    return s;
  }
  [[nodiscard]] std::vector<double> residual_norms() const {
    std::vector<double> s;
    for (const auto& st : steps) s.push_back(st.residual_norm);
    return s;
  }
  [[nodiscard]] CoefficientVector approximant() const { return steps.empty() ? CoefficientVector{} : steps.back().coefficients; }
  [[nodiscard]] double final_norm() const { return steps.empty() ? initial_norm : steps.back().residual_norm; }
};

/// A projection failure inside a run; carries the trace up to the failure.
struct GreedyFailure : ConvergenceError {
  GreedyFailure(const ConvergenceError& e, GreedyTrace partial)
      : ConvergenceError(e), trace(std::move(partial)) {}
  GreedyTrace trace;
};

struct WcgaOptions {
  double t = 1.0;
  std::size_t max_iter = 10;
  double stop_tol = 0.0;
  ProjectionOptions projection{};
};

namespace detail {

/// Largest |F| wins at t = 1 (lowest index on ties); for t < 1 the first
/// index in canonical order reaching t * sup.
inline std::size_t weak_select(const Eigen::VectorXd& absF, double t, double* sup) {
  Eigen::Index arg = 0;
  *sup = absF.maxCoeff(&arg);
  if (t >= 1.0) return static_cast<std::size_t>(arg);
  const double threshold = t * *sup;
  for (Eigen::Index i = 0; i < absF.size(); ++i) {
    if (absF[i] >= threshold) return static_cast<std::size_t>(i);
  }
  return static_cast<std::size_t>(arg);
}

inline void check_weakness(double t) {
  if (!(t > 0.0 && t <= 1.0)) throw ParameterError("weakness parameter t must lie in (0, 1]");
}

}  // namespace detail

inline GreedyTrace wcga_run(const SampledFunction& f0, const SampledSystem& system, LpExponent p,
                            const WcgaOptions& opts) {
  detail::check_weakness(opts.t);
  if (f0.size() != system.points()) throw DimensionError("function and system live on different supports");
  GreedyTrace trace;
  trace.p = p;
  trace.t = opts.t;
  trace.initial_norm = lp_norm(f0, p);
  trace.residual = f0.values();
  if (trace.initial_norm == 0.0) {
    trace.exact = true;
    return trace;
  }
  const RVector& w = f0.weights();
  std::vector<std::size_t> basis;  // distinct selected indices
  CVector residual = f0.values();
  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    const CVector kernel = norming_kernel(residual, w, p);
    const CVector F = system.values.transpose() * kernel;
    GreedyStep step;
    step.selected = detail::weak_select(F.cwiseAbs(), opts.t, &step.functional_max);
    step.functional_value = F[static_cast<Eigen::Index>(step.selected)];
    step.reselected = std::find(basis.begin(), basis.end(), step.selected) != basis.end();
    if (!step.reselected) basis.push_back(step.selected);
    ProjectionResult proj;
    try {
      proj = project_columns(select_columns(system.values, basis), f0.values(), w, p, opts.projection);
    } catch (const ConvergenceError& e) {
      throw GreedyFailure(e, trace);
    }
    residual = proj.residual;
    step.residual_norm = proj.residual_norm;
    if (!trace.steps.empty()) step.residual_norm = std::min(step.residual_norm, trace.steps.back().residual_norm);
    step.coefficients = CoefficientVector::from_support(basis, proj.coefficients);
    trace.steps.push_back(std::move(step));
    trace.residual = residual;
    if (proj.residual_norm <= kZeroResidual * trace.initial_norm) {
      trace.exact = true;
      break;
    }
    if (proj.residual_norm <= opts.stop_tol * trace.initial_norm) break;
  }
  return trace;
}

/// WCGA at p = 2 carried out in coefficient space. Everything it needs from
/// the samples is the Gram matrix of the system in L_2(nu) and the
/// correlations b_k = <f0, g_k>_nu; the projection is an incrementally
/// updated Cholesky factorization. Selections agree with wcga_run on the
/// same data up to floating-point ties.
class GramGreedy {
 public:
  GramGreedy(const TrigGram& gram, CVector correlations, double f0_norm_sq)
      : gram_(gram), b_(std::move(correlations)), f0_sq_(f0_norm_sq) {
    if (static_cast<std::size_t>(b_.size()) != gram.system().size()) throw DimensionError("correlation length differs from N");
  }

  GreedyTrace run(const WcgaOptions& opts) {
    detail::check_weakness(opts.t);
    GreedyTrace trace;
    trace.p = 2.0;
    trace.t = opts.t;
    trace.initial_norm = std::sqrt(std::max(f0_sq_, 0.0));
    if (trace.initial_norm == 0.0) {
      trace.exact = true;
      return trace;
    }
    const auto N = b_.size();
    std::vector<std::size_t> basis;
    CMatrix cols(N, 0);  // Gram columns of the basis
    CMatrix L(0, 0);
    CVector c(0);
    CVector corr = b_;
    double res_norm = trace.initial_norm;
    for (std::size_t it = 0; it < opts.max_iter; ++it) {
      GreedyStep step;
      const Eigen::VectorXd absF = corr.cwiseAbs() / res_norm;
      step.selected = detail::weak_select(absF, opts.t, &step.functional_max);
      step.functional_value = std::conj(corr[static_cast<Eigen::Index>(step.selected)]) / res_norm;
      step.reselected = std::find(basis.begin(), basis.end(), step.selected) != basis.end();
      if (!step.reselected) {
        const CVector gcol = gram_.column(step.selected);
        const auto k = static_cast<Eigen::Index>(basis.size());
        CVector cross(k);
        for (Eigen::Index i = 0; i < k; ++i) cross[i] = gcol[static_cast<Eigen::Index>(basis[static_cast<std::size_t>(i)])];
        CVector y = k > 0 ? CVector(L.triangularView<Eigen::Lower>().solve(cross)) : CVector(0);
        const double diag_sq = gcol[static_cast<Eigen::Index>(step.selected)].real() - y.squaredNorm();
        if (diag_sq > 1e-14 * gcol[static_cast<Eigen::Index>(step.selected)].real()) {
          CMatrix Ln = CMatrix::Zero(k + 1, k + 1);
          Ln.topLeftCorner(k, k) = L;
          Ln.block(k, 0, 1, k) = y.adjoint();
          Ln(k, k) = std::sqrt(diag_sq);
          L = std::move(Ln);
          basis.push_back(step.selected);
          cols.conservativeResize(Eigen::NoChange, k + 1);
          cols.col(k) = gcol;
        } else {
          step.reselected = true;  // numerically dependent: projection unchanged
        }
      }
      const auto k = static_cast<Eigen::Index>(basis.size());
      CVector bS(k);
      for (Eigen::Index i = 0; i < k; ++i) bS[i] = b_[static_cast<Eigen::Index>(basis[static_cast<std::size_t>(i)])];
      const CVector z = L.triangularView<Eigen::Lower>().solve(bS);
      c = L.adjoint().triangularView<Eigen::Upper>().solve(z);
      // <r, g_i> = b_i - sum_l c_l <g_l, g_i>; cols(i, l) = <g_l, g_i>
      corr = b_ - cols * c;
      res_norm = std::sqrt(std::max(f0_sq_ - z.squaredNorm(), 0.0));
      if (!trace.steps.empty()) res_norm = std::min(res_norm, trace.steps.back().residual_norm);
      step.residual_norm = res_norm;
      step.coefficients = CoefficientVector::from_support(basis, c);
      trace.steps.push_back(std::move(step));
      if (res_norm <= std::sqrt(kZeroResidual) * trace.initial_norm) {
        // cancellation limits the norm to ~sqrt(eps); confirm with the correlations
        if (corr.cwiseAbs().maxCoeff() <= 1e-12 * trace.initial_norm || res_norm == 0.0) {
          trace.exact = true;
          break;
        }
      }
      if (res_norm <= opts.stop_tol * trace.initial_norm) break;
      if (res_norm == 0.0) break;
    }
    return trace;
  }

 private:
  const TrigGram& gram_;
  CVector b_;
  double f0_sq_;
};

// ---------------------------------------------------------------------------
// Iteration budgets

enum class BudgetMode { cgt1, cgt2, dt2 };

struct BudgetSpec {
  double t = 1.0;
  double p = 2.0;
  double V = 1.0;
  double r = 0.5;
  std::optional<double> U;
  std::size_t v = 1;
  double c = 1.0;   // absolute constant in the cgt2/dt2 forms
  double Cq = 1.0;  // C(q) in the cgt1 form
};

struct IterationBudget {
  std::size_t u = 1;
  double raw = 0.0;
  std::string warning;
};

/// Power-type modulus of smoothness of L_p: eta(w) <= gamma w^q.
struct Smoothness {
  double gamma;
  double q;
};

inline Smoothness lp_smoothness(double p) {
  if (p >= 2.0) return {(p - 1.0) / 2.0, 2.0};
  return {1.0 / p, p};
}

/// cgt1: ceil(C(q) gamma^{1/(q-1)} t^{-q'} V^{q'} ln(Vv) v^{rq'})
/// cgt2: ceil(c (2V)^{q*} ln(2Vv) v^{rq*})
/// dt2:  ceil(c (2V)^{q*} ln(3U+1) v^{rq*})
inline IterationBudget iteration_budget(const BudgetSpec& s, BudgetMode mode) {
  const LpExponent p(s.p);
  if (s.p == 1.0) throw ParameterError("iteration budgets need p > 1 (q* is undefined at p = 1)");
  if (!(s.t > 0.0 && s.t <= 1.0)) throw ParameterError("t must lie in (0, 1]");
  if (s.v == 0) throw ParameterError("v must be at least 1");
  if (!(s.V > 0.0)) throw ParameterError("V must be positive");
  const double v = static_cast<double>(s.v);
  const double qs = p.q_star();
  double raw = 0.0;
  switch (mode) {
    case BudgetMode::cgt1: {
      const auto [gamma, q] = lp_smoothness(s.p);
      const double qp = q / (q - 1.0);
      raw = s.Cq * std::pow(gamma, 1.0 / (q - 1.0)) * std::pow(s.t, -qp) * std::pow(s.V, qp) * std::log(s.V * v) *
            std::pow(v, s.r * qp);
      break;
    }
    case BudgetMode::cgt2:
      raw = s.c * std::pow(2.0 * s.V, qs) * std::log(2.0 * s.V * v) * std::pow(v, s.r * qs);
      break;
    case BudgetMode::dt2:
      if (!s.U) throw ParameterError("dt2 budget needs the unconditionality parameter U");
      raw = s.c * std::pow(2.0 * s.V, qs) * std::log(3.0 * *s.U + 1.0) * std::pow(v, s.r * qs);
      break;
  }
  IterationBudget out;
  out.raw = raw;
  if (!(raw >= 1.0) || !std::isfinite(raw)) {
    out.u = 1;
    out.warning = "budget formula gave " + std::to_string(raw) + "; clamped to 1";
    return out;
  }
  out.u = static_cast<std::size_t>(std::ceil(raw));
  return out;
}

// ---------------------------------------------------------------------------
// Block greedy v-term approximation

struct BlockGreedyPlan {
  double alpha = 0.0;
  long n = -1;               // blocks 0..n kept in full; -1 keeps nothing
  std::size_t J = 0;         // v_j = 0 for j > J
  std::vector<std::size_t> budgets;  // v_j for j = n+1 .. n+budgets.size()
  std::size_t count = 0;     // terms the plan can use
};

struct BlockGreedyResult {
  BlockGreedyPlan plan;
  std::vector<std::size_t> support;
  CoefficientVector approximant;
  /// sum over the blocks j > n of the system of B (v_j + 1)^{1 - 1/beta} 2^{-rj}:
  /// the l_1 tail of each block times B, valid in every L_p for class members.
  double predicted_error_bound = 0.0;
  /// sum of (v_j + 1)^{1/p* - 1/beta} 2^{-rj}: the rate-shaped bound, which
  /// holds only up to a constant C(p).
  double rate_shape_bound = 0.0;
};

/// Number of frequencies with |k|_inf < 2^n in dimension d.
inline std::size_t prefix_count(long n, std::size_t d) {
  if (n < 0) return 0;
  const auto side = static_cast<std::size_t>((1L << (n + 1)) - 1);
  std::size_t c = 1;
  for (std::size_t a = 0; a < d; ++a) c *= side;
  return c;
}

/// v_j = [2^{nd - alpha(j - n)}] for any level j.
inline std::size_t block_budget(long n, std::size_t d, double alpha, std::size_t j) {
  const double e = static_cast<double>(n) * static_cast<double>(d) - alpha * (static_cast<double>(j) - static_cast<double>(n));
  return static_cast<std::size_t>(std::floor(std::pow(2.0, e) + 1e-12));
}

/// alpha (1/beta - 1/p*) = r/2, v_j = [2^{nd - alpha(j - n)}], J = ceil(nd/alpha) + n + 1.
inline BlockGreedyPlan block_greedy_plan(long n, double p, double beta, double r, std::size_t d) {
  const double ps = std::min(p, 2.0);
  if (!(beta > 0.0 && beta <= 1.0)) throw ParameterError("beta must lie in (0, 1]");
  if (!(r > 0.0)) throw ParameterError("smoothness r must be positive");
  if (!(p > 1.0)) throw ParameterError("block greedy needs p > 1");
  if (!(beta < ps)) throw ParameterError("need beta < p* so that alpha > 0");
  BlockGreedyPlan plan;
  plan.alpha = r / (2.0 * (1.0 / beta - 1.0 / ps));
  plan.n = n;
  if (n < 0) return plan;
  const double nd = static_cast<double>(n) * static_cast<double>(d);
  plan.J = static_cast<std::size_t>(std::ceil(nd / plan.alpha)) + static_cast<std::size_t>(n) + 1;
  plan.count = prefix_count(n, d);
  for (std::size_t j = static_cast<std::size_t>(n) + 1; j <= plan.J; ++j) {
    const std::size_t vj = block_budget(n, d, plan.alpha, j);
    plan.budgets.push_back(vj);
    plan.count += vj;
  }
  return plan;
}

/// Keeps blocks 0..n and the v_j largest coefficients of each block j > n,
/// with n the largest level whose plan uses at most v terms.
inline BlockGreedyResult block_greedy_vterm(const CoefficientVector& coeffs, const TrigSystem& system, std::size_t v,
                                            double p, double beta, double r, double B = 1.0) {
  check_indices(coeffs, system.size());
  const std::size_t d = system.dim();
  BlockGreedyResult out;
  out.plan = block_greedy_plan(-1, p, beta, r, d);
  for (long n = 0; n <= static_cast<long>(system.max_level()) + 1; ++n) {
    auto plan = block_greedy_plan(n, p, beta, r, d);
    if (plan.count > v) break;
    out.plan = std::move(plan);
  }
  const auto& plan = out.plan;
  const double ps = std::min(p, 2.0);
  auto budget = [&](std::size_t j) -> std::size_t {
    if (plan.n < 0) return 0;
    const auto off = j - static_cast<std::size_t>(plan.n) - 1;
    return off < plan.budgets.size() ? plan.budgets[off] : 0;
  };
  for (std::size_t j = 0; j <= system.max_level(); ++j) {
    const auto [lo, hi] = system.block_range(j);
    std::vector<std::pair<std::size_t, Complex>> entries;
    for (auto it = coeffs.entries().lower_bound(lo); it != coeffs.end() && it->first < hi; ++it) entries.emplace_back(*it);
    if (plan.n >= 0 && static_cast<long>(j) <= plan.n) {
      for (const auto& [i, c] : entries) out.approximant.set(i, c);
      continue;
    }
    const std::size_t vj = budget(j);
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return std::abs(a.second) > std::abs(b.second); });
    for (std::size_t q = 0; q < std::min(vj, entries.size()); ++q) out.approximant.set(entries[q].first, entries[q].second);
    const double jr = std::pow(2.0, -r * static_cast<double>(j));
    const double vj1 = static_cast<double>(vj) + 1.0;
    out.predicted_error_bound += B * std::pow(vj1, 1.0 - 1.0 / beta) * jr;
    out.rate_shape_bound += std::pow(vj1, 1.0 / ps - 1.0 / beta) * jr;
  }
  out.support = out.approximant.support();
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force oracles

inline constexpr double kDefaultEnumerationCap = 2e5;

struct BestVTerm {
  std::vector<std::size_t> support;
  CoefficientVector approximant;
  double error = 0.0;
  std::size_t supports_tested = 0;
};

/// All k-subsets of [0, n) in lexicographic order.
inline std::vector<std::vector<std::size_t>> enumerate_supports(std::size_t n, std::size_t k, double cap) {
  const double count = binomial(n, k);
  if (count > cap) throw CapExceeded(count, cap);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<std::size_t> s(k);
  std::iota(s.begin(), s.end(), std::size_t{0});
  if (k == 0) {
    out.push_back({});
    return out;
  }
  while (true) {
    out.push_back(s);
    std::size_t i = k;
    while (i > 0 && s[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++s[i - 1];
    for (std::size_t j = i; j < k; ++j) s[j] = s[j - 1] + 1;
  }
  return out;
}

/// sigma_v(f0, D)_{L_p(measure of f0)} by enumeration of all v-subsets;
/// the lexicographically first optimal support wins ties.
inline BestVTerm sigma_v_bruteforce(const SampledFunction& f0, const SampledSystem& system, std::size_t v, LpExponent p,
                                    double cap = kDefaultEnumerationCap, const ProjectionOptions& opts = {}) {
  if (f0.size() != system.points()) throw DimensionError("function and system live on different supports");
  if (v > system.size()) throw ParameterError("v exceeds the dictionary size");
  const auto supports = enumerate_supports(system.size(), v, cap);
  std::vector<ProjectionResult> results(supports.size());
  parallel_for(supports.size(), [&](std::size_t s) {
    results[s] = project_columns(select_columns(system.values, supports[s]), f0.values(), f0.weights(), p, opts);
  });
  std::size_t best = 0;
  for (std::size_t s = 1; s < supports.size(); ++s) {
    if (results[s].residual_norm < results[best].residual_norm) best = s;
  }
  return {supports[best], CoefficientVector::from_support(supports[best], results[best].coefficients),
          results[best].residual_norm, supports.size()};
}

/// B_v(f, D_N, L_p(xi)): the best v-term approximant computed from the
/// samples of f on xi alone.
inline BestVTerm bv_best_vterm_recovery(const SampledFunction& samples, const SampledSystem& system, std::size_t v,
                                        LpExponent p, double cap = kDefaultEnumerationCap,
                                        const ProjectionOptions& opts = {}) {
  if (v == 0) return {{}, {}, lp_norm(samples, p), 1};
  return sigma_v_bruteforce(samples, system, v, p, cap, opts);
}

}  // namespace wcga
