#pragma once

// Universal sampling discretization: random point sets, sample
// budgets, and empirical certificates for usd, RIP(l_p, ||.||), incoherence
// and unconditionality. Every certificate is a lower bound on the true
// extreme obtained by adversarial search; failing a threshold is reported,
// never raised.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wcga/adversarial.hpp"
#include "wcga/core.hpp"
#include "wcga/dictionaries.hpp"
#include "wcga/lp_space.hpp"
#include "wcga/rng.hpp"

namespace wcga {

// Stream tags for the trial generators. usd and RIP share one so that a RIP
// check on G_N(xi) revisits exactly the supports the usd check visited.
inline constexpr std::uint64_t kSparseTrialStream = 0x5D5;
inline constexpr std::uint64_t kIncoherenceStream = 0x1C0;
inline constexpr std::uint64_t kUnconditionalStream = 0x0C0;
inline constexpr std::uint64_t kPointStream = 0x9E7;

/// m i.i.d. uniform points on [0, 2pi)^d; point nu is drawn from its own
/// counter stream.
inline PointSet draw_random_points(std::size_t d, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw ParameterError("need at least one point");
  if (d == 0) throw ParameterError("dimension must be positive");
  std::vector<double> coords(m * d);
  const double below_two_pi = std::nextafter(kTwoPi, 0.0);
  for (std::size_t nu = 0; nu < m; ++nu) {
    CounterRng rng(seed, {kPointStream, nu});
    for (std::size_t a = 0; a < d; ++a) coords[nu * d + a] = std::min(kTwoPi * rng.uniform(), below_two_pi);
  }
  return PointSet(d, std::move(coords));
}

// ---------------------------------------------------------------------------
// Sample budgets

struct SampleBudgetConstants {
  double C = 1.0;
  double epsilon = 0.5;  // only used for p > 2
};

struct BudgetResult {
  std::size_t value = 0;
  std::string warning;  // non-empty for degenerate inputs
};

/// p > 2:  ceil(C eps^-7 u^{p/2} (ln N)^2)
/// p <= 2: ceil(C K u ln N (ln 2Ku)^2 (ln 2Ku + ln ln N))
/// K is the Bessel constant (R1^-2 for a Riesz system).
inline BudgetResult sample_budget(double p, std::size_t u, std::size_t N, double K,
                                  const SampleBudgetConstants& constants = {}) {
  if (p < 1.0) throw ParameterError("p must be >= 1");
  if (u > N) throw ParameterError("u must not exceed N");
  if (u == 0) return {0, "u = 0: empty collection, no points needed"};
  if (N < 2) throw ParameterError("N must be at least 2 for the logarithmic factors");
  const double lnN = std::log(static_cast<double>(N));
  const double du = static_cast<double>(u);
  double m;
  if (p > 2.0) {
    if (!(constants.epsilon > 0.0 && constants.epsilon < 1.0)) throw ParameterError("epsilon must lie in (0,1)");
    m = constants.C * std::pow(constants.epsilon, -7.0) * std::pow(du, p / 2.0) * lnN * lnN;
  } else {
    if (!(K > 0.0)) throw ParameterError("K must be positive");
    const double l2ku = std::log(2.0 * K * du);
    m = constants.C * K * du * lnN * l2ku * l2ku * (l2ku + std::log(lnN));
  }
  if (!std::isfinite(m) || m < 1.0) return {1, "formula gave a value below 1; clamped"};
  return {static_cast<std::size_t>(std::ceil(m)), {}};
}

// ---------------------------------------------------------------------------
// Norm models: how to evaluate ||sum_{i in B} c_i g_i|| for a support B.

struct NormModel {
  double p = 2.0;
  std::function<LinearNorm(const std::vector<std::size_t>&)> restrict;
  /// <g_l, g_k> block for rows/cols; available for L_2 models.
  std::function<CMatrix(const std::vector<std::size_t>&, const std::vector<std::size_t>&)> gram;
};

/// L_p(mu) on the torus: Parseval (identity) at p = 2, system quadrature otherwise.
inline NormModel continuous_norm_model(const TrigSystem& system, double p) {
  NormModel model;
  model.p = p;
  if (p == 2.0) {
    model.restrict = [](const std::vector<std::size_t>& b) { return LinearNorm::identity(b.size()); };
    model.gram = [](const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
      CMatrix g = CMatrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
          if (rows[r] == cols[c]) g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 1.0;
        }
      }
      return g;
    };
    return model;
  }
  auto grid = std::make_shared<PointSet>(
      PointSet::uniform_grid(system.dim(), quadrature_nodes_per_axis(system.max_frequency())));
  const TrigSystem* sys = &system;
  model.restrict = [sys, grid, p](const std::vector<std::size_t>& b) {
    const auto g = static_cast<Eigen::Index>(grid->size());
    return LinearNorm{sys->sample_columns(*grid, b), RVector::Constant(g, 1.0 / static_cast<double>(g)), p};
  };
  return model;
}

/// L_p(nu) for a discrete measure nu (default mu_m on the points).
inline NormModel discrete_norm_model(const TrigSystem& system, const PointSet& points, double p,
                                     std::optional<RVector> weights = std::nullopt) {
  system.check_dim(points);
  auto pts = std::make_shared<PointSet>(points);
  const auto m = static_cast<Eigen::Index>(points.size());
  auto w = std::make_shared<RVector>(weights ? *weights : RVector::Constant(m, 1.0 / static_cast<double>(m)));
  if (w->size() != m) throw DimensionError("weights/points mismatch");
  const TrigSystem* sys = &system;
  NormModel model;
  model.p = p;
  model.restrict = [sys, pts, w, p](const std::vector<std::size_t>& b) {
    return LinearNorm{sys->sample_columns(*pts, b), *w, p};
  };
  if (p == 2.0) {
    auto gram = std::make_shared<TrigGram>(system, points, *w);
    model.gram = [gram](const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
      return gram->block(rows, cols);
    };
  }
  return model;
}

/// Columns of an explicit matrix with weights (e.g. a tabulated system or
/// G_N(xi) in l_p^m, where all weights are 1).
inline NormModel matrix_norm_model(std::shared_ptr<const CMatrix> matrix, RVector weights, double p) {
  if (weights.size() != matrix->rows()) throw DimensionError("weights/rows mismatch");
  auto w = std::make_shared<RVector>(std::move(weights));
  NormModel model;
  model.p = p;
  model.restrict = [matrix, w, p](const std::vector<std::size_t>& b) {
    CMatrix cols(matrix->rows(), static_cast<Eigen::Index>(b.size()));
    for (std::size_t c = 0; c < b.size(); ++c) {
      if (b[c] >= static_cast<std::size_t>(matrix->cols())) throw IndexError("column index out of range");
      cols.col(static_cast<Eigen::Index>(c)) = matrix->col(static_cast<Eigen::Index>(b[c]));
    }
    return LinearNorm{std::move(cols), *w, p};
  };
  return model;
}

namespace detail {

inline std::vector<std::size_t> sorted_draw(CounterRng& rng, std::size_t n, std::size_t k) {
  auto s = rng.sample_without_replacement(n, k);
  std::sort(s.begin(), s.end());
  return s;
}

inline CMatrix gram_of(const NormModel& model, const std::vector<std::size_t>& b) {
  if (model.gram) return model.gram(b, b);
  return model.restrict(b).gram();
}

inline CoefficientVector to_coefficients(const Extremum& e) {
  return CoefficientVector::from_support(e.support.outer, e.coeffs);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// usd certificate

struct UsdReport {
  double lower_ratio = 0.0;
  double upper_ratio = 0.0;
  std::size_t trials = 0;
  std::size_t u = 0;
  double p = 2.0;
  std::size_t m = 0;
  CoefficientVector lower_witness;  // normalized to continuous norm 1
  CoefficientVector upper_witness;
  bool pass = false;
};

struct UsdOptions {
  std::size_t trials = 1000;
  std::size_t refine_steps = 3;
  std::uint64_t seed = 0;
  bool exact_quadratic = true;
};

/// Searches u-sparse f for the extremes of (1/m) sum |f(xi^j)|^p / ||f||_p^p
/// and reports whether they stay in [1/2, 3/2].
inline UsdReport verify_usd(const NormModel& discrete, const NormModel& continuous, std::size_t N, std::size_t u,
                            const UsdOptions& opts) {
  if (u == 0 || u > N) throw ParameterError("need 1 <= u <= N");
  const double p = discrete.p;
  RatioProblem problem;
  problem.draw_support = [N, u](CounterRng& rng) { return TrialSupport{detail::sorted_draw(rng, N, u), {}, 1.0}; };
  problem.numerator = [&](const TrialSupport& s) { return discrete.restrict(s.outer); };
  problem.denominator = [&](const TrialSupport& s) { return continuous.restrict(s.outer); };
  problem.quadratic = p == 2.0 && continuous.p == 2.0;
  if (problem.quadratic) {
    problem.numerator_gram = [&](const TrialSupport& s) { return detail::gram_of(discrete, s.outer); };
    problem.denominator_gram = [&](const TrialSupport& s) { return detail::gram_of(continuous, s.outer); };
  }
  const auto ext = search_ratio(problem, {opts.trials, opts.refine_steps, opts.seed, kSparseTrialStream,
                                          opts.exact_quadratic, true, true});
  UsdReport rep;
  rep.trials = ext.trials;
  rep.u = u;
  rep.p = p;
  rep.lower_ratio = std::pow(ext.min.value, p);
  rep.upper_ratio = std::pow(ext.max.value, p);
  auto normalized = [&](const Extremum& e) {
    const double c = continuous.restrict(e.support.outer)(e.coeffs);
    return detail::to_coefficients(Extremum{e.value, e.trial, e.support, e.coeffs / c});
  };
  rep.lower_witness = normalized(ext.min);
  rep.upper_witness = normalized(ext.max);
  rep.pass = rep.lower_ratio >= 0.5 && rep.upper_ratio <= 1.5;
  return rep;
}

inline UsdReport verify_usd(const TrigSystem& system, const PointSet& points, std::size_t u, double p,
                            const UsdOptions& opts = {}) {
  static_cast<void>(LpExponent{p});
  auto rep = verify_usd(discrete_norm_model(system, points, p), continuous_norm_model(system, p), system.size(), u,
                        opts);
  rep.m = points.size();
  return rep;
}

/// The ratio (1/m) sum |f(xi^j)|^p / ||f||_p^p for an explicit f.
inline double usd_ratio(const TrigSystem& system, const PointSet& points, const CoefficientVector& f, double p) {
  const CVector vals = evaluate(system, f, points);
  const RVector w = RVector::Constant(vals.size(), 1.0 / static_cast<double>(vals.size()));
  const double disc = weighted_lp_norm(vals, w, p);
  const double cont = continuous_lp_norm(system, f, p);
  return std::pow(disc / cont, p);
}

// ---------------------------------------------------------------------------
// RIP(l_p, ||.||)

/// G_N(xi): columns m^{-1/p} (g_i(xi^1), ..., g_i(xi^m))^T.
inline CMatrix synthesis_sampling_matrix(const TrigSystem& system, const PointSet& points, double p) {
  return system.sample(points) * std::pow(static_cast<double>(points.size()), -1.0 / p);
}

struct EuclideanNorm {};
/// ||a|| := ||sum a_i g_i||_{L_p(mu)}.
struct SynthesisNorm {
  const TrigSystem* system;
};
using RipNorm = std::variant<EuclideanNorm, SynthesisNorm>;

struct RipReport {
  double delta_estimate = 0.0;
  double lower_ratio = 0.0;  // min ||Ua||_p / ||a||
  double upper_ratio = 0.0;
  std::size_t v = 0;
  double p = 2.0;
  std::string norm;  // "euclidean" or "synthesis"
  std::size_t trials = 0;
  CoefficientVector lower_witness;
  CoefficientVector upper_witness;
};

struct RipOptions {
  std::size_t trials = 1000;
  std::size_t refine_steps = 3;
  std::uint64_t seed = 0;
  bool exact_quadratic = true;
};

/// delta = max over tested v-sparse a of | ||Ua||_{l_p^m} / ||a|| - 1 |.
inline RipReport rip_check(const CMatrix& U, const RipNorm& norm, double p, std::size_t v, const RipOptions& opts = {}) {
  static_cast<void>(LpExponent{p});
  const std::size_t N = static_cast<std::size_t>(U.cols());
  if (v == 0 || v > N) throw ParameterError("need 1 <= v <= N");
  const auto numerator = matrix_norm_model(std::make_shared<CMatrix>(U), RVector::Ones(U.rows()), p);
  NormModel denominator;
  std::string tag;
  if (std::holds_alternative<EuclideanNorm>(norm)) {
    denominator.p = 2.0;
    denominator.restrict = [](const std::vector<std::size_t>& b) { return LinearNorm::identity(b.size()); };
    tag = "euclidean";
  } else {
    const auto* sys = std::get<SynthesisNorm>(norm).system;
    if (sys->size() != N) throw DimensionError("synthesis system size differs from matrix columns");
    denominator = continuous_norm_model(*sys, p);
    tag = "synthesis";
  }
  RatioProblem problem;
  problem.draw_support = [N, v](CounterRng& rng) { return TrialSupport{detail::sorted_draw(rng, N, v), {}, 1.0}; };
  problem.numerator = [&](const TrialSupport& s) { return numerator.restrict(s.outer); };
  problem.denominator = [&](const TrialSupport& s) { return denominator.restrict(s.outer); };
  problem.quadratic = p == 2.0 && denominator.p == 2.0;
  const auto ext = search_ratio(problem, {opts.trials, opts.refine_steps, opts.seed, kSparseTrialStream,
                                          opts.exact_quadratic, true, true});
  RipReport rep;
  rep.lower_ratio = ext.min.value;
  rep.upper_ratio = ext.max.value;
  rep.delta_estimate = std::max({0.0, rep.upper_ratio - 1.0, 1.0 - rep.lower_ratio});
  rep.v = v;
  rep.p = p;
  rep.norm = tag;
  rep.trials = ext.trials;
  rep.lower_witness = detail::to_coefficients(ext.min);
  rep.upper_witness = detail::to_coefficients(ext.max);
  return rep;
}

/// ||Ua||_{l_p^m} / ||a|| for one coefficient vector.
inline double rip_ratio(const CMatrix& U, const RipNorm& norm, double p, const CoefficientVector& a) {
  const CVector dense = a.to_dense(static_cast<std::size_t>(U.cols()));
  const double num = weighted_lp_norm(U * dense, RVector::Ones(U.rows()), p);
  double den;
  if (std::holds_alternative<EuclideanNorm>(norm)) {
    den = dense.norm();
  } else {
    den = continuous_lp_norm(*std::get<SynthesisNorm>(norm).system, a, p);
  }
  return num / den;
}

// ---------------------------------------------------------------------------
// Incoherence and unconditionality

struct ContinuousContext {};
struct DiscreteContext {
  PointSet points;
};
using NormContext = std::variant<ContinuousContext, DiscreteContext>;

inline NormModel norm_model(const TrigSystem& system, const NormContext& ctx, double p) {
  if (std::holds_alternative<ContinuousContext>(ctx)) return continuous_norm_model(system, p);
  return discrete_norm_model(system, std::get<DiscreteContext>(ctx).points, p);
}

struct IncoherenceEstimate {
  double V_estimate = 0.0;
  double r = 0.5;
  std::size_t v = 0;
  std::size_t S = 0;
  std::size_t trials = 0;
  std::vector<std::size_t> witness_inner;  // A (global indices)
  CoefficientVector witness;               // coefficients on B
};

struct EstimateOptions {
  std::size_t trials = 200;
  std::size_t refine_steps = 3;
  std::uint64_t seed = 0;
  bool exact_quadratic = true;
};

namespace detail {

/// |A| uniform in [1, v], |B| uniform in [|A|, S]; A = first |A| draws of B.
inline TrialSupport nested_draw(CounterRng& rng, std::size_t N, std::size_t v, std::size_t S) {
  const std::size_t a = 1 + rng.below(v);
  const std::size_t b = a + rng.below(S - a + 1);
  auto outer = rng.sample_without_replacement(N, b);
  std::vector<std::size_t> inner_global(outer.begin(), outer.begin() + static_cast<std::ptrdiff_t>(a));
  std::sort(outer.begin(), outer.end());
  std::vector<std::size_t> inner;
  for (std::size_t g : inner_global) {
    inner.push_back(static_cast<std::size_t>(std::lower_bound(outer.begin(), outer.end(), g) - outer.begin()));
  }
  std::sort(inner.begin(), inner.end());
  return {std::move(outer), std::move(inner), 1.0};
}

inline void check_nested(std::size_t N, std::size_t v, std::size_t S) {
  if (v == 0 || v > S || S > N) throw ParameterError("need 1 <= v <= S <= N");
}

}  // namespace detail

/// Lower bound on the smallest V with sum_{A} |c_i| <= V |A|^r ||sum_B c_i g_i||.
inline IncoherenceEstimate incoherence_estimate(const NormModel& model, std::size_t N, std::size_t v, std::size_t S,
                                                double r, const EstimateOptions& opts = {}) {
  detail::check_nested(N, v, S);
  RatioProblem problem;
  problem.draw_support = [N, v, S, r](CounterRng& rng) {
    auto s = detail::nested_draw(rng, N, v, S);
    s.scale = std::pow(static_cast<double>(s.inner.size()), r);
    return s;
  };
  problem.numerator = [](const TrialSupport& s) {
    CMatrix sel = CMatrix::Zero(static_cast<Eigen::Index>(s.inner.size()), static_cast<Eigen::Index>(s.outer.size()));
    for (std::size_t k = 0; k < s.inner.size(); ++k) sel(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(s.inner[k])) = 1.0;
    return LinearNorm{std::move(sel), RVector::Ones(static_cast<Eigen::Index>(s.inner.size())), 1.0};
  };
  problem.denominator = [&](const TrialSupport& s) { return model.restrict(s.outer); };
  const auto ext = search_ratio(problem, {opts.trials, opts.refine_steps, opts.seed, kIncoherenceStream,
                                          opts.exact_quadratic, true, false});
  IncoherenceEstimate est;
  est.V_estimate = ext.max.value;
  est.r = r;
  est.v = v;
  est.S = S;
  est.trials = ext.trials;
  for (std::size_t k : ext.max.support.inner) est.witness_inner.push_back(ext.max.support.outer[k]);
  est.witness = detail::to_coefficients(ext.max);
  return est;
}

inline IncoherenceEstimate incoherence_estimate(const TrigSystem& system, const NormContext& ctx, double p,
                                                std::size_t v, std::size_t S, double r,
                                                const EstimateOptions& opts = {}) {
  return incoherence_estimate(norm_model(system, ctx, p), system.size(), v, S, r, opts);
}

/// sum_{i in A} |c_i| / (|A|^r ||sum_{i in B} c_i g_i||) for explicit data.
inline double incoherence_ratio(const NormModel& model, const std::vector<std::size_t>& A,
                                const CoefficientVector& coeffs_on_B, double r) {
  double l1 = 0.0;
  for (std::size_t i : A) l1 += std::abs(coeffs_on_B.get(i));
  const auto B = coeffs_on_B.support();
  CVector c(static_cast<Eigen::Index>(B.size()));
  for (std::size_t k = 0; k < B.size(); ++k) c[static_cast<Eigen::Index>(k)] = coeffs_on_B.get(B[k]);
  return l1 / (std::pow(static_cast<double>(A.size()), r) * model.restrict(B)(c));
}

struct UnconditionalityEstimate {
  double U_estimate = 0.0;
  std::size_t v = 0;
  std::size_t S = 0;
  std::size_t trials = 0;
  std::vector<std::size_t> witness_inner;
  CoefficientVector witness;
};

/// Lower bound on the smallest U with ||sum_A c_i g_i|| <= U ||sum_B c_i g_i||.
inline UnconditionalityEstimate unconditionality_estimate(const NormModel& model, std::size_t N, std::size_t v,
                                                          std::size_t S, const EstimateOptions& opts = {}) {
  detail::check_nested(N, v, S);
  auto mask = [](LinearNorm n, const TrialSupport& s) {
    std::vector<bool> keep(s.outer.size(), false);
    for (std::size_t k : s.inner) keep[k] = true;
    for (std::size_t c = 0; c < keep.size(); ++c) {
      if (!keep[c]) n.map.col(static_cast<Eigen::Index>(c)).setZero();
    }
    return n;
  };
  RatioProblem problem;
  problem.draw_support = [N, v, S](CounterRng& rng) { return detail::nested_draw(rng, N, v, S); };
  problem.numerator = [&](const TrialSupport& s) { return mask(model.restrict(s.outer), s); };
  problem.denominator = [&](const TrialSupport& s) { return model.restrict(s.outer); };
  problem.quadratic = model.p == 2.0;
  if (problem.quadratic) {
    problem.numerator_gram = [&](const TrialSupport& s) {
      CMatrix g = detail::gram_of(model, s.outer);
      std::vector<bool> keep(s.outer.size(), false);
      for (std::size_t k : s.inner) keep[k] = true;
      for (std::size_t c = 0; c < keep.size(); ++c) {
        if (!keep[c]) {
          g.col(static_cast<Eigen::Index>(c)).setZero();
          g.row(static_cast<Eigen::Index>(c)).setZero();
        }
      }
      return g;
    };
    problem.denominator_gram = [&](const TrialSupport& s) { return detail::gram_of(model, s.outer); };
  }
  const auto ext = search_ratio(problem, {opts.trials, opts.refine_steps, opts.seed, kUnconditionalStream,
                                          opts.exact_quadratic, true, false});
  UnconditionalityEstimate est;
  est.U_estimate = ext.max.value;
  est.v = v;
  est.S = S;
  est.trials = ext.trials;
  for (std::size_t k : ext.max.support.inner) est.witness_inner.push_back(ext.max.support.outer[k]);
  est.witness = detail::to_coefficients(ext.max);
  return est;
}

inline UnconditionalityEstimate unconditionality_estimate(const TrigSystem& system, const NormContext& ctx, double p,
                                                          std::size_t v, std::size_t S,
                                                          const EstimateOptions& opts = {}) {
  return unconditionality_estimate(norm_model(system, ctx, p), system.size(), v, S, opts);
}

}  // namespace wcga
