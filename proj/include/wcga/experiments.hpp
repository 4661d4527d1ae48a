#pragma once

// Desk-scale experiments: sampling recovery rates for A^r_beta, the linear
// least-squares baseline, Lebesgue-ratio ensembles, oracle comparisons and
// log-log rate fitting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "wcga/config.hpp"
#include "wcga/core.hpp"
#include "wcga/dictionaries.hpp"
#include "wcga/discretization.hpp"
#include "wcga/function_classes.hpp"
#include "wcga/greedy.hpp"
#include "wcga/parallel.hpp"
#include "wcga/rng.hpp"

namespace wcga {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Rate fitting

struct RateFit {
  double slope = kNaN;
  double intercept = kNaN;
  double residual = kNaN;  // RMS of the log-log fit
  std::size_t points = 0;
};

/// Least squares of log y on log x over the rows with finite positive y.
inline RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("x and y differ in length");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] > 0.0 && std::isfinite(y[i]) && x[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 4) throw ParameterError("rate fit needs at least 4 rows with positive error");
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ParameterError("rate fit needs at least two distinct x values");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  fit.points = lx.size();
  return fit;
}

// ---------------------------------------------------------------------------
// Configuration

struct SamplingRule {
  /// "log_power": m = ceil(C v (ln 2v)^exponent); "formula": sample_budget
  /// evaluated for the certified sparsity.
  std::string mode = "log_power";
  double C = 1.0;
  double exponent = 4.0;
  double epsilon = 0.5;
  double K = 1.0;
};

struct CertificationRule {
  double u_factor = 1.0;  // certify X_u with u = ceil(u_factor v)
  std::size_t trials = 200;
  std::size_t refine_steps = 3;
  std::size_t max_attempts = 5;
};

struct GreedyRule {
  double t = 1.0;
  double tol = 1e-9;
  /// "linear": u = ceil(kappa v); otherwise "cgt1", "cgt2" or "dt2".
  std::string budget = "linear";
  double kappa = 2.0;
  double c = 1.0;
  double Cq = 1.0;
  double V = 1.0;
  double r = 0.5;
  double U = 1.0;
};

struct MemberRule {
  std::size_t count = 20;
  std::vector<double> densities{1.0, 0.5, 0.25, 1e-3};
  std::string mode = "extremal";  // extremal | slack
  std::string kind = "class";     // class | sparse (exactly v-sparse)
};

struct ExperimentConfig {
  std::string name = "rates";
  ClassSpec cls;
  std::size_t system_level = 8;
  double p = 2.0;
  std::vector<std::size_t> v_grid{4, 8, 16, 32, 64};
  SamplingRule sampling;
  CertificationRule certification;
  GreedyRule greedy;
  MemberRule members;
  std::string measure = "empirical";  // empirical | mixed
  bool linear_baseline = true;
  std::uint64_t seed = 1;

  void validate() const {
    cls.validate();
    static_cast<void>(LpExponent{p});
    if (v_grid.empty()) throw ConfigError("v_grid must not be empty");
    for (std::size_t i = 0; i < v_grid.size(); ++i) {
      if (v_grid[i] == 0) throw ConfigError("v_grid entries must be positive");
      if (i > 0 && v_grid[i] <= v_grid[i - 1]) throw ConfigError("v_grid must be increasing");
    }
    if (members.count == 0 || certification.trials == 0) throw ConfigError("trial counts must be at least 1");
    if (members.densities.empty()) throw ConfigError("members.densities must not be empty");
    if (certification.max_attempts == 0) throw ConfigError("certification.max_attempts must be at least 1");
    if (measure != "empirical" && measure != "mixed") throw ConfigError("measure must be 'empirical' or 'mixed'");
    if (sampling.mode != "log_power" && sampling.mode != "formula") throw ConfigError("sampling.mode must be 'log_power' or 'formula'");
    if (members.mode != "extremal" && members.mode != "slack") throw ConfigError("members.mode must be 'extremal' or 'slack'");
    if (members.kind != "class" && members.kind != "sparse") throw ConfigError("members.kind must be 'class' or 'sparse'");
    if (greedy.budget != "linear" && greedy.budget != "cgt1" && greedy.budget != "cgt2" && greedy.budget != "dt2") {
      throw ConfigError("greedy.budget must be one of linear, cgt1, cgt2, dt2");
    }
  }
};

inline SamplingRule read_sampling(ConfigReader rd) {
  SamplingRule s;
  s.mode = rd.get("mode", s.mode);
  s.C = rd.get("C", s.C);
  s.exponent = rd.get("exponent", s.exponent);
  s.epsilon = rd.get("epsilon", s.epsilon);
  s.K = rd.get("K", s.K);
  rd.finish();
  return s;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ConfigReader rd(j, "");
  ExperimentConfig c;
  c.name = rd.get("name", c.name);
  {
    auto cr = rd.child("class");
    c.cls.r = cr.get("r", c.cls.r);
    c.cls.beta = cr.get("beta", c.cls.beta);
    c.cls.d = cr.get("d", c.cls.d);
    c.cls.B = cr.get("B", c.cls.B);
    cr.finish();
  }
  c.system_level = rd.get("system_level", c.system_level);
  c.p = rd.get("p", c.p);
  c.v_grid = rd.get("v_grid", c.v_grid);
  c.sampling = read_sampling(rd.child("sampling"));
  {
    auto cr = rd.child("certification");
    c.certification.u_factor = cr.get("u_factor", c.certification.u_factor);
    c.certification.trials = cr.get("trials", c.certification.trials);
    c.certification.refine_steps = cr.get("refine_steps", c.certification.refine_steps);
    c.certification.max_attempts = cr.get("max_attempts", c.certification.max_attempts);
    cr.finish();
  }
  {
    auto gr = rd.child("greedy");
    c.greedy.t = gr.get("t", c.greedy.t);
    c.greedy.tol = gr.get("tol", c.greedy.tol);
    c.greedy.budget = gr.get("budget", c.greedy.budget);
    c.greedy.kappa = gr.get("kappa", c.greedy.kappa);
    c.greedy.c = gr.get("c", c.greedy.c);
    c.greedy.Cq = gr.get("Cq", c.greedy.Cq);
    c.greedy.V = gr.get("V", c.greedy.V);
    c.greedy.r = gr.get("r", c.greedy.r);
    c.greedy.U = gr.get("U", c.greedy.U);
    gr.finish();
  }
  {
    auto mr = rd.child("members");
    c.members.count = mr.get("count", c.members.count);
    c.members.densities = mr.get("densities", c.members.densities);
    c.members.mode = mr.get("mode", c.members.mode);
    c.members.kind = mr.get("kind", c.members.kind);
    mr.finish();
  }
  c.measure = rd.get("measure", c.measure);
  c.linear_baseline = rd.get("linear_baseline", c.linear_baseline);
  c.seed = rd.get("seed", c.seed);
  rd.finish();
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Shared pieces

inline std::size_t sample_count(const SamplingRule& rule, std::size_t v, std::size_t u_cert, std::size_t N, double p) {
  if (rule.mode == "log_power") {
    const double m = rule.C * static_cast<double>(v) * std::pow(std::log(2.0 * static_cast<double>(v)), rule.exponent);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(m)));
  }
  return std::max<std::size_t>(1, sample_budget(p, std::min(u_cert, N), N, rule.K, {rule.C, rule.epsilon}).value);
}

inline std::size_t greedy_iterations(const GreedyRule& g, std::size_t v, double p) {
  if (g.budget == "linear") return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(g.kappa * static_cast<double>(v))));
  BudgetSpec s;
  s.t = g.t;
  s.p = p;
  s.V = g.V;
  s.r = g.r;
  s.U = g.U;
  s.v = v;
  s.c = g.c;
  s.Cq = g.Cq;
  const BudgetMode mode = g.budget == "cgt1" ? BudgetMode::cgt1 : g.budget == "cgt2" ? BudgetMode::cgt2 : BudgetMode::dt2;
  return iteration_budget(s, mode).u;
}

/// sigma_k(f)_2 for the orthonormal trigonometric system: the l_2 norm of
/// all but the k largest coefficients.
inline double l2_best_kterm_error(const CoefficientVector& a, std::size_t k) {
  std::vector<double> mods;
  for (const auto& [i, c] : a) mods.push_back(std::norm(c));
  if (k >= mods.size()) return 0.0;
  std::sort(mods.begin(), mods.end(), std::greater<>());
  double s = 0.0;
  for (std::size_t i = mods.size(); i-- > k;) s += mods[i];
  return std::sqrt(s);
}

inline constexpr std::uint64_t kExperimentPointStream = 0x7A1;
inline constexpr std::uint64_t kExperimentMemberStream = 0x7A2;

struct CertifiedPoints {
  PointSet points;
  std::uint64_t seed = 0;
  std::size_t attempts = 0;
  UsdReport report;
  bool certified = false;
};

/// Draws m points and certifies usd for X_u; on failure redraws with a
/// fresh seed, up to max_attempts times.
inline CertifiedPoints certified_points(const TrigSystem& system, std::size_t m, std::size_t u, double p,
                                        const CertificationRule& rule, std::uint64_t seed, std::uint64_t tag) {
  CertifiedPoints out;
  for (std::size_t a = 0; a < rule.max_attempts; ++a) {
    CounterRng rng(seed, {kExperimentPointStream, tag, a});
    out.seed = rng();
    out.attempts = a + 1;
    out.points = draw_random_points(system.dim(), m, out.seed);
    out.report = verify_usd(system, out.points, std::min(u, system.size()), p,
                            {rule.trials, rule.refine_steps, out.seed, true});
    if (out.report.pass) {
      out.certified = true;
      break;
    }
  }
  return out;
}

inline std::uint64_t member_seed(std::uint64_t seed, std::size_t i) {
  CounterRng rng(seed, {kExperimentMemberStream, i});
  return rng();
}

inline CoefficientVector sparse_member(const TrigSystem& system, std::size_t v, std::uint64_t seed) {
  CounterRng rng(seed, {kExperimentMemberStream, 1});
  const auto support = rng.sample_without_replacement(system.size(), std::min(v, system.size()));
  CoefficientVector a;
  for (std::size_t i : support) a.set(i, rng.complex_normal());
  return a;
}

inline CoefficientVector experiment_member(const ExperimentConfig& c, const TrigSystem& system, std::size_t v,
                                           std::size_t i) {
  const std::uint64_t s = member_seed(c.seed, i);
  if (c.members.kind == "sparse") return sparse_member(system, v, s);
  const double density = c.members.densities[i % c.members.densities.size()];
  return sample_member(c.cls, system, density, s, c.members.mode == "slack" ? MemberMode::slack : MemberMode::extremal);
}

// ---------------------------------------------------------------------------
// Recovery pipeline

struct RateRow {
  std::size_t v = 0;
  std::size_t m = 0;
  std::size_t u = 0;  // greedy iterations (or subspace dimension for the baseline)
  std::size_t attempts = 0;
  bool certified = false;
  double lower_ratio = kNaN;
  double upper_ratio = kNaN;
  std::uint64_t points_seed = 0;
  double mean_error = kNaN;
  double max_error = kNaN;
  /// max over members of the best approximation error with as many terms
  /// as the recovered approximant uses (p = 2 only).
  double sigma_oracle = kNaN;
  /// min over members of error - oracle; never negative beyond rounding.
  double min_excess = kNaN;
  /// max over members of the continuous error of B_v (tiny systems only).
  double bv_max_error = kNaN;
  std::size_t members = 0;
  bool ridge = false;  // baseline only: ridge fallback used
};

struct RateTable {
  std::string label;
  double p = 2.0;
  std::vector<RateRow> rows;
  std::optional<RateFit> fit;
  std::string fit_error;

  void refit() {
    std::vector<double> x, y;
    for (const auto& r : rows) {
      x.push_back(static_cast<double>(r.v));
      y.push_back(r.max_error);
    }
    try {
      fit = fit_rate(x, y);
      fit_error.clear();
    } catch (const ParameterError& e) {
      fit.reset();
      fit_error = e.what();
    }
  }
};

struct MemberOutcome {
  double error = kNaN;
  double sigma = kNaN;
  double bv_error = kNaN;
};

namespace detail {

inline MemberOutcome recover_member(const ExperimentConfig& c, const TrigSystem& system, const PointSet& points,
                                    const TrigGram* gram, const CoefficientVector& a, std::size_t v, std::size_t u) {
  MemberOutcome out;
  const auto mu = std::make_shared<DiscreteMeasure>(DiscreteMeasure::empirical(points));
  CoefficientVector approx;
  if (gram) {
    const SampledFunction f = evaluate(system, a, mu);
    const double nsq = std::pow(lp_norm(f, 2.0), 2);
    GramGreedy gg(*gram, trig_correlations(system, f), nsq);
    approx = gg.run({c.greedy.t, u, 0.0, {c.greedy.tol}}).approximant();
  } else {
    MeasurePtr measure = mu;
    if (c.measure == "mixed") {
      measure = std::make_shared<DiscreteMeasure>(DiscreteMeasure::mixture(*system_quadrature(system), *mu));
    }
    const SampledSystem ss = restrict_system(system, measure);
    approx = wcga_run(ss.synthesize(a), ss, c.p, {c.greedy.t, u, 0.0, {c.greedy.tol}}).approximant();
  }
  out.error = continuous_lp_norm(system, a - approx, c.p);
  if (c.p == 2.0) out.sigma = l2_best_kterm_error(a, approx.nnz());
  if (system.size() <= 24 && v <= 3) {
    const SampledSystem ss = restrict_system(system, mu);
    const auto bv = bv_best_vterm_recovery(ss.synthesize(a), ss, v, c.p, kDefaultEnumerationCap, {c.greedy.tol});
    out.bv_error = continuous_lp_norm(system, a - bv.approximant, c.p);
  }
  return out;
}

inline void aggregate(RateRow& row, const std::vector<MemberOutcome>& outcomes) {
  double sum = 0.0, mx = 0.0, sig = kNaN, excess = kNaN, bv = kNaN;
  for (const auto& o : outcomes) {
    sum += o.error;
    mx = std::max(mx, o.error);
    if (!std::isnan(o.sigma)) {
      sig = std::isnan(sig) ? o.sigma : std::max(sig, o.sigma);
      const double e = o.error - o.sigma;
      excess = std::isnan(excess) ? e : std::min(excess, e);
    }
    if (!std::isnan(o.bv_error)) bv = std::isnan(bv) ? o.bv_error : std::max(bv, o.bv_error);
  }
  row.members = outcomes.size();
  row.mean_error = sum / static_cast<double>(outcomes.size());
  row.max_error = mx;
  row.sigma_oracle = sig;
  row.min_excess = excess;
  row.bv_max_error = bv;
}

}  // namespace detail

/// For each v: certified points, class members sampled at the points,
/// WCGA with the configured iteration budget, continuous error of the
/// recovered approximant; the row keeps the max over members as the
/// estimate of the optimal recovery error on the class.
inline RateTable recovery_pipeline(const ExperimentConfig& c) {
  c.validate();
  const TrigSystem system(c.cls.d, c.system_level);
  RateTable table;
  table.label = "wcga";
  table.p = c.p;
  for (std::size_t v : c.v_grid) {
    RateRow row;
    row.v = v;
    const std::size_t u_cert = static_cast<std::size_t>(std::ceil(c.certification.u_factor * static_cast<double>(v)));
    row.m = sample_count(c.sampling, v, u_cert, system.size(), c.p);
    row.u = std::min(greedy_iterations(c.greedy, v, c.p), system.size());
    const auto cp = certified_points(system, row.m, u_cert, c.p, c.certification, c.seed, v);
    row.attempts = cp.attempts;
    row.certified = cp.certified;
    row.points_seed = cp.seed;
    row.lower_ratio = cp.report.lower_ratio;
    row.upper_ratio = cp.report.upper_ratio;
    if (!cp.certified) {
      table.rows.push_back(row);
      continue;
    }
    std::optional<TrigGram> gram;
    if (c.p == 2.0 && c.measure == "empirical") {
      const auto m = static_cast<Eigen::Index>(cp.points.size());
      gram.emplace(system, cp.points, RVector::Constant(m, 1.0 / static_cast<double>(m)));
    }
    std::vector<MemberOutcome> outcomes(c.members.count);
    parallel_for(c.members.count, [&](std::size_t i) {
      const auto a = experiment_member(c, system, v, i);
      outcomes[i] = detail::recover_member(c, system, cp.points, gram ? &*gram : nullptr, a, v, row.u);
    });
    detail::aggregate(row, outcomes);
    table.rows.push_back(row);
  }
  table.refit();
  return table;
}

// ---------------------------------------------------------------------------
// Linear baseline

/// Indices of the frequencies with |k|_inf < n.
inline std::vector<std::size_t> cube_indices(const TrigSystem& system, int n) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < system.size(); ++i) {
    const auto& k = system.frequency(i);
    if (std::all_of(k.begin(), k.end(), [n](int x) { return std::abs(x) < n; })) out.push_back(i);
  }
  return out;
}

struct LinearFit {
  CoefficientVector coefficients;
  bool ridge = false;
};

/// Least squares in L_2(mu_m) onto span{g_k : k in indices} from samples.
inline LinearFit least_squares_recovery(const TrigSystem& system, const PointSet& points, const CVector& samples,
                                        const std::vector<std::size_t>& indices) {
  const auto m = static_cast<Eigen::Index>(points.size());
  const auto D = static_cast<Eigen::Index>(indices.size());
  if (m < D) throw ParameterError("fewer samples than the subspace dimension");
  if (samples.size() != m) throw DimensionError("sample count differs from the point count");
  const CMatrix A = system.sample_columns(points, indices) / std::sqrt(static_cast<double>(m));
  const CVector y = samples / std::sqrt(static_cast<double>(m));
  CMatrix G = A.adjoint() * A;
  const CVector b = A.adjoint() * y;
  LinearFit out;
  Eigen::LDLT<CMatrix> ldlt(G);
  CVector c;
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-12) {
    c = ldlt.solve(b);
  } else {
    out.ridge = true;
    const double shift = 1e-10 * std::max(1.0, G.diagonal().real().maxCoeff());
    G.diagonal().array() += shift;
    c = Eigen::LDLT<CMatrix>(G).solve(b);
  }
  out.coefficients = CoefficientVector::from_support(indices, c);
  return out;
}

/// Linear recovery on the cube |k|_inf < n with (2n-1)^d <= min(v, m/2),
/// using the points certified by the nonlinear pipeline for the same v.
inline RateTable linear_baseline(const ExperimentConfig& c, const RateTable& nonlinear) {
  c.validate();
  if (c.p != 2.0) throw ParameterError("the linear baseline is defined for p = 2");
  const TrigSystem system(c.cls.d, c.system_level);
  RateTable table;
  table.label = "linear";
  table.p = 2.0;
  for (const auto& src : nonlinear.rows) {
    RateRow row;
    row.v = src.v;
    row.m = src.m;
    row.attempts = src.attempts;
    row.certified = src.certified;
    row.points_seed = src.points_seed;
    row.lower_ratio = src.lower_ratio;
    row.upper_ratio = src.upper_ratio;
    if (!src.certified) {
      table.rows.push_back(row);
      continue;
    }
    const double cap = std::min(static_cast<double>(src.v), static_cast<double>(src.m) / 2.0);
    int n = 0;
    while (std::pow(2.0 * (n + 1) - 1.0, static_cast<double>(system.dim())) <= cap && n + 1 <= system.max_frequency() + 1) ++n;
    const auto indices = cube_indices(system, n);
    row.u = indices.size();
    const PointSet points = draw_random_points(system.dim(), src.m, src.points_seed);
    std::vector<MemberOutcome> outcomes(c.members.count);
    std::vector<char> ridge(c.members.count, 0);
    parallel_for(c.members.count, [&](std::size_t i) {
      const auto a = experiment_member(c, system, src.v, i);
      const auto fit = least_squares_recovery(system, points, evaluate(system, a, points), indices);
      outcomes[i].error = continuous_l2_norm(system, a - fit.coefficients);
      ridge[i] = fit.ridge;
    });
    detail::aggregate(row, outcomes);
    row.ridge = std::any_of(ridge.begin(), ridge.end(), [](char r) { return r != 0; });
    table.rows.push_back(row);
  }
  table.refit();
  return table;
}

inline RateTable linear_baseline(const ExperimentConfig& c) {
  const TrigSystem system(c.cls.d, c.system_level);
  RateTable points_only;
  for (std::size_t v : c.v_grid) {
    RateRow row;
    row.v = v;
    const std::size_t u_cert = static_cast<std::size_t>(std::ceil(c.certification.u_factor * static_cast<double>(v)));
    row.m = sample_count(c.sampling, v, u_cert, system.size(), c.p);
    const auto cp = certified_points(system, row.m, u_cert, c.p, c.certification, c.seed, v);
    row.attempts = cp.attempts;
    row.certified = cp.certified;
    row.points_seed = cp.seed;
    row.lower_ratio = cp.report.lower_ratio;
    row.upper_ratio = cp.report.upper_ratio;
    points_only.rows.push_back(row);
  }
  return linear_baseline(c, points_only);
}

// ---------------------------------------------------------------------------
// Lebesgue ensembles

struct LebesgueConfig {
  std::size_t d = 1;
  std::size_t system_level = 3;
  double p = 2.0;
  std::size_t v = 2;
  std::size_t m = 0;  // 0: from the sampling rule with u = 2v
  SamplingRule sampling;
  std::size_t trials = 20;
  double perturbation = 0.05;
  double kappa = 3.0;
  double sup_q = 16.0;
  double tol = 1e-9;
  double cap = kDefaultEnumerationCap;
  std::uint64_t seed = 1;
};

inline LebesgueConfig lebesgue_config_from_json(const nlohmann::json& j) {
  ConfigReader rd(j, "");
  LebesgueConfig c;
  c.d = rd.get("d", c.d);
  c.system_level = rd.get("system_level", c.system_level);
  c.p = rd.get("p", c.p);
  c.v = rd.get("v", c.v);
  c.m = rd.get("m", c.m);
  c.sampling = read_sampling(rd.child("sampling"));
  c.trials = rd.get("trials", c.trials);
  c.perturbation = rd.get("perturbation", c.perturbation);
  c.kappa = rd.get("kappa", c.kappa);
  c.sup_q = rd.get("sup_q", c.sup_q);
  c.tol = rd.get("tol", c.tol);
  c.cap = rd.get("cap", c.cap);
  c.seed = rd.get("seed", c.seed);
  rd.finish();
  if (c.trials == 0) throw ConfigError("trials must be at least 1");
  if (c.v == 0) throw ConfigError("v must be at least 1");
  if (!(c.sup_q >= 2.0)) throw ConfigError("sup_q must be at least 2");
  static_cast<void>(LpExponent{c.p});
  return c;
}

struct LebesgueRow {
  std::size_t trial = 0;
  double f0_norm = kNaN;
  double wcga_error = kNaN;
  double bv_error = kNaN;
  double sigma_inf = kNaN;    // sup-norm best v-term error on the grid (upper estimate)
  double sigma_mixed = kNaN;  // best v-term error in L_p((mu + mu_m)/2)
  double ratio_wcga_inf = kNaN;
  double ratio_wcga_mixed = kNaN;
  double ratio_bv_inf = kNaN;
  double ratio_bv_mixed = kNaN;
  bool wcga_exact = false;
  bool bv_exact = false;
};

struct Quantiles {
  double min = kNaN, median = kNaN, q90 = kNaN, max = kNaN;
  std::size_t count = 0;
};

inline Quantiles quantiles(std::vector<double> x) {
  x.erase(std::remove_if(x.begin(), x.end(), [](double y) { return !std::isfinite(y); }), x.end());
  Quantiles q;
  q.count = x.size();
  if (x.empty()) return q;
  std::sort(x.begin(), x.end());
  // nearest-rank quantile
  auto rank = [&](double f) {
    const auto k = static_cast<std::size_t>(std::ceil(f * static_cast<double>(x.size())));
    return x[std::clamp<std::size_t>(k, 1, x.size()) - 1];
  };
  q.min = x.front();
  q.median = rank(0.5);
  q.q90 = rank(0.9);
  q.max = x.back();
  return q;
}

struct LebesgueTable {
  std::size_t N = 0, m = 0, u = 0, v = 0;
  double p = 2.0;
  std::vector<LebesgueRow> rows;
  Quantiles wcga_inf, wcga_mixed, bv_inf, bv_mixed;
  double bv_not_worse_fraction = kNaN;  // share of trials with ratio_bv <= ratio_wcga (sup-norm ratios)
  bool all_finite = true;
};

namespace detail {

inline double safe_ratio(double err, double sigma, double scale, bool* exact) {
  if (err <= 1e-8 * scale) {
    *exact = true;
    return kNaN;
  }
  if (sigma <= 0.0) return std::numeric_limits<double>::infinity();
  return err / sigma;
}

}  // namespace detail

inline constexpr std::uint64_t kLebesgueStream = 0x7A3;

/// Random f0 = (v-sparse) + perturbation * h with |h|_{A_1} = 1, recovered by
/// WCGA (u = ceil(kappa v) iterations) and by B_v from samples on m random
/// points; errors in L_p(mu) are compared with sigma_v(f0)_inf and with
/// sigma_v(f0) in L_p((mu + mu_m)/2).
inline LebesgueTable lebesgue_ensemble(const LebesgueConfig& c) {
  const TrigSystem system(c.d, c.system_level);
  const std::size_t N = system.size();
  if (c.v > N) throw ParameterError("v exceeds N");
  const double needed = binomial(N, c.v);
  if (needed > c.cap) throw CapExceeded(needed, c.cap);
  LebesgueTable table;
  table.N = N;
  table.v = c.v;
  table.p = c.p;
  table.m = c.m > 0 ? c.m : sample_count(c.sampling, c.v, 2 * c.v, N, c.p);
  table.u = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(c.kappa * static_cast<double>(c.v))));
  CounterRng prng(c.seed, {kLebesgueStream, 0});
  const PointSet points = draw_random_points(c.d, table.m, prng());
  const auto mu_m = std::make_shared<DiscreteMeasure>(DiscreteMeasure::empirical(points));
  const auto grid = system_quadrature(system);
  const auto mixed = std::make_shared<DiscreteMeasure>(DiscreteMeasure::mixture(*grid, *mu_m));
  const SampledSystem on_points = restrict_system(system, mu_m);
  const SampledSystem on_grid = restrict_system(system, grid);
  const SampledSystem on_mixed = restrict_system(system, mixed);
  const ProjectionOptions popts{c.tol};
  const ProjectionOptions sup_opts{1e-6};
  const auto supports = enumerate_supports(N, c.v, c.cap);

  for (std::size_t t = 0; t < c.trials; ++t) {
    CounterRng rng(c.seed, {kLebesgueStream, 1, t});
    CoefficientVector a;
    for (std::size_t i : rng.sample_without_replacement(N, c.v)) a.set(i, rng.complex_normal());
    if (c.perturbation > 0.0) {
      CVector h(static_cast<Eigen::Index>(N));
      for (auto& z : h) z = rng.complex_normal();
      h /= h.cwiseAbs().sum();
      for (std::size_t i = 0; i < N; ++i) a.add(i, c.perturbation * h[static_cast<Eigen::Index>(i)]);
    }
    LebesgueRow row;
    row.trial = t;
    row.f0_norm = continuous_lp_norm(system, a, c.p);
    const SampledFunction samples = on_points.synthesize(a);
    const auto trace = wcga_run(samples, on_points, c.p, {1.0, table.u, 0.0, popts});
    row.wcga_error = continuous_lp_norm(system, a - trace.approximant(), c.p);
    const auto bv = bv_best_vterm_recovery(samples, on_points, c.v, c.p, c.cap, popts);
    row.bv_error = continuous_lp_norm(system, a - bv.approximant, c.p);

    const SampledFunction on_g = on_grid.synthesize(a);
    std::vector<double> sup_err(supports.size());
    parallel_for(supports.size(), [&](std::size_t s) {
      const auto res = project_columns(select_columns(on_grid.values, supports[s]), on_g.values(), on_g.weights(),
                                       c.sup_q, sup_opts);
      sup_err[s] = res.residual.cwiseAbs().maxCoeff();
    });
    row.sigma_inf = *std::min_element(sup_err.begin(), sup_err.end());
    row.sigma_mixed = sigma_v_bruteforce(on_mixed.synthesize(a), on_mixed, c.v, c.p, c.cap, popts).error;

    row.ratio_wcga_inf = detail::safe_ratio(row.wcga_error, row.sigma_inf, row.f0_norm, &row.wcga_exact);
    row.ratio_wcga_mixed = detail::safe_ratio(row.wcga_error, row.sigma_mixed, row.f0_norm, &row.wcga_exact);
    row.ratio_bv_inf = detail::safe_ratio(row.bv_error, row.sigma_inf, row.f0_norm, &row.bv_exact);
    row.ratio_bv_mixed = detail::safe_ratio(row.bv_error, row.sigma_mixed, row.f0_norm, &row.bv_exact);
    table.rows.push_back(row);
  }

  std::vector<double> wi, wm, bi, bm;
  std::size_t compared = 0, bv_ok = 0;
  for (const auto& r : table.rows) {
    wi.push_back(r.ratio_wcga_inf);
    wm.push_back(r.ratio_wcga_mixed);
    bi.push_back(r.ratio_bv_inf);
    bm.push_back(r.ratio_bv_mixed);
    for (double x : {r.ratio_wcga_inf, r.ratio_wcga_mixed, r.ratio_bv_inf, r.ratio_bv_mixed}) {
      if (std::isinf(x)) table.all_finite = false;
    }
    const double bw = r.bv_exact ? 0.0 : r.ratio_bv_inf;
    const double ww = r.wcga_exact ? 0.0 : r.ratio_wcga_inf;
    if (!std::isnan(bw) && !std::isnan(ww)) {
      ++compared;
      if (bw <= ww) ++bv_ok;
    }
  }
  table.wcga_inf = quantiles(wi);
  table.wcga_mixed = quantiles(wm);
  table.bv_inf = quantiles(bi);
  table.bv_mixed = quantiles(bm);
  if (compared > 0) table.bv_not_worse_fraction = static_cast<double>(bv_ok) / static_cast<double>(compared);
  return table;
}

// ---------------------------------------------------------------------------
// Oracle comparison on a random bounded dictionary

struct OracleConfig {
  std::size_t N = 16;
  std::size_t m = 24;
  std::size_t v_max = 3;
  std::size_t instances = 50;
  double p = 2.0;
  double tol = 1e-9;
  std::uint64_t seed = 1;
};

inline OracleConfig oracle_config_from_json(const nlohmann::json& j) {
  ConfigReader rd(j, "");
  OracleConfig c;
  c.N = rd.get("N", c.N);
  c.m = rd.get("m", c.m);
  c.v_max = rd.get("v_max", c.v_max);
  c.instances = rd.get("instances", c.instances);
  c.p = rd.get("p", c.p);
  c.tol = rd.get("tol", c.tol);
  c.seed = rd.get("seed", c.seed);
  rd.finish();
  if (c.N == 0 || c.m == 0 || c.instances == 0) throw ConfigError("N, m and instances must be positive");
  if (c.v_max == 0 || c.v_max > c.N) throw ConfigError("need 1 <= v_max <= N");
  static_cast<void>(LpExponent{c.p});
  return c;
}

struct OracleRow {
  std::size_t instance = 0;
  std::size_t v = 0;
  double wcga_error = kNaN;
  double sigma_error = kNaN;
  double bv_error = kNaN;
  bool dominance = true;  // wcga >= sigma - 1e-9
  bool bv_equal = true;   // bv == sigma exactly
};

struct OracleTable {
  std::vector<OracleRow> rows;
  std::size_t dominance_failures = 0;
  std::size_t bv_mismatches = 0;
};

inline constexpr std::uint64_t kOracleStream = 0x7A4;

/// Unimodular random dictionary of N elements on m points (so B = 1) and
/// complex Gaussian targets: WCGA after v steps, sigma_v by enumeration and
/// B_v, all in L_p(mu_m).
inline OracleTable oracle_compare(const OracleConfig& c) {
  CounterRng drng(c.seed, {kOracleStream, 0});
  CMatrix values(static_cast<Eigen::Index>(c.m), static_cast<Eigen::Index>(c.N));
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) values(i, j) = std::polar(1.0, kTwoPi * drng.uniform());
  }
  const auto measure = std::make_shared<DiscreteMeasure>(
      DiscreteMeasure::empirical(detail::default_tabulation_points(c.m)));
  const SampledSystem system{values, measure};
  const ProjectionOptions popts{c.tol};
  OracleTable table;
  table.rows.resize(c.instances * c.v_max);
  parallel_for(c.instances, [&](std::size_t inst) {
    CounterRng rng(c.seed, {kOracleStream, 1, inst});
    CVector f(static_cast<Eigen::Index>(c.m));
    for (auto& z : f) z = rng.complex_normal();
    const SampledFunction f0(f, measure);
    const auto trace = wcga_run(f0, system, c.p, {1.0, c.v_max, 0.0, popts});
    for (std::size_t v = 1; v <= c.v_max; ++v) {
      OracleRow& row = table.rows[inst * c.v_max + (v - 1)];
      row.instance = inst;
      row.v = v;
      row.wcga_error = v <= trace.steps.size() ? trace.steps[v - 1].residual_norm : trace.final_norm();
      row.sigma_error = sigma_v_bruteforce(f0, system, v, c.p, kDefaultEnumerationCap, popts).error;
      row.bv_error = bv_best_vterm_recovery(f0, system, v, c.p, kDefaultEnumerationCap, popts).error;
      row.dominance = row.wcga_error >= row.sigma_error - 1e-9;
      row.bv_equal = row.bv_error == row.sigma_error;
    }
  });
  for (const auto& r : table.rows) {
    if (!r.dominance) ++table.dominance_failures;
    if (!r.bv_equal) ++table.bv_mismatches;
  }
  return table;
}

}  // namespace wcga
