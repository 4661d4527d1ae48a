#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "wcga/experiments.hpp"

using namespace wcga;
using namespace testing_support;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.cls = {1.0, 1.0, 1, 1.0};
  c.system_level = 5;
  c.v_grid = {4, 6, 8, 12, 16};
  c.certification.trials = 50;
  c.members.count = 6;
  c.seed = 2;
  return c;
}

}  // namespace

TEST(FitRate, Examples) {
  const std::vector<double> v{4, 8, 16, 32, 64};
  std::vector<double> a, b, c;
  for (double x : v) {
    a.push_back(std::pow(x, -1.5));
    b.push_back(0.3);
    c.push_back(2.0 / x);
  }
  EXPECT_NEAR(fit_rate(v, a).slope, -1.5, 1e-9);
  EXPECT_NEAR(fit_rate(v, a).residual, 0.0, 1e-9);
  EXPECT_NEAR(fit_rate(v, b).slope, 0.0, 1e-12);
  const auto f = fit_rate(v, c);
  EXPECT_NEAR(f.slope, -1.0, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(2.0), 1e-12);
  EXPECT_EQ(f.points, 5u);
}

TEST(FitRate, FiltersZerosAndRefusesShortInput) {
  EXPECT_EQ(fit_rate({1, 2, 3, 4, 5}, {1.0, 0.0, 0.5, 0.25, 0.2}).points, 4u);
  EXPECT_THROW(fit_rate({1, 2, 3, 4}, {1.0, 0.0, 0.5, 0.25}), ParameterError);
  EXPECT_THROW(fit_rate({1, 2, 3}, {1.0, 0.5, 0.3}), ParameterError);
}

TEST(RatePipeline, SparseMembersAreRecoveredExactly) {
  auto c = small_config();
  c.members.kind = "sparse";
  const auto t = recovery_pipeline(c);
  ASSERT_EQ(t.rows.size(), c.v_grid.size());
  for (const auto& r : t.rows) {
    EXPECT_TRUE(r.certified);
    EXPECT_LE(r.max_error, 1e-7) << "v=" << r.v;
  }
}

TEST(RatePipeline, CertifiesAndStaysWithinBounds) {
  const auto c = small_config();
  const auto t = recovery_pipeline(c);
  for (const auto& r : t.rows) {
    EXPECT_TRUE(r.certified);
    EXPECT_GE(r.lower_ratio, 0.5);
    EXPECT_LE(r.upper_ratio, 1.5);
    EXPECT_GE(r.max_error, 0.0);
    EXPECT_GE(r.max_error, r.mean_error);
    EXPECT_GE(r.min_excess, -1e-9);  // never beats the best k-term approximation
  }
  ASSERT_TRUE(t.fit.has_value());
  EXPECT_LT(t.fit->slope, -1.0);
}

TEST(RatePipeline, ErrorNeverExceedsTargetNorm) {
  auto c = small_config();
  c.v_grid = {4, 8};
  c.members.count = 4;
  const TrigSystem system(1, c.system_level);
  for (std::size_t v : c.v_grid) {
    const std::size_t m = sample_count(c.sampling, v, v, system.size(), c.p);
    const auto cp = certified_points(system, m, v, c.p, c.certification, c.seed, v);
    for (std::size_t i = 0; i < 4; ++i) {
      const auto a = experiment_member(c, system, v, i);
      const auto out = detail::recover_member(c, system, cp.points, nullptr, a, v, greedy_iterations(c.greedy, v, c.p));
      EXPECT_LE(out.error, continuous_l2_norm(system, a) * (1.0 + 1e-12));
    }
  }
}

TEST(RatePipeline, HalvingMembersNeverIncreasesMaxError) {
  const auto c = small_config();
  auto half = c;
  half.members.count = c.members.count / 2;
  const auto full = recovery_pipeline(c), part = recovery_pipeline(half);
  for (std::size_t k = 0; k < full.rows.size(); ++k) EXPECT_LE(part.rows[k].max_error, full.rows[k].max_error);
}

TEST(RatePipeline, Deterministic) {
  const auto c = small_config();
  const auto a = recovery_pipeline(c), b = recovery_pipeline(c);
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_EQ(a.rows[k].max_error, b.rows[k].max_error);
    EXPECT_EQ(a.rows[k].mean_error, b.rows[k].mean_error);
    EXPECT_EQ(a.rows[k].points_seed, b.rows[k].points_seed);
  }
  EXPECT_EQ(a.fit->slope, b.fit->slope);
}

TEST(RatePipeline, SmallSystemCrossChecksBv) {
  ExperimentConfig c;
  c.system_level = 3;
  c.v_grid = {1, 2, 3};
  c.members.count = 3;
  c.certification.trials = 50;
  c.sampling.C = 3.0;
  const auto t = recovery_pipeline(c);
  for (const auto& r : t.rows) {
    ASSERT_TRUE(r.certified) << r.v;
    EXPECT_TRUE(std::isfinite(r.bv_max_error));
  }
}

TEST(RatePipeline, OtherExponentAndMixedMeasure) {
  auto c = small_config();
  c.p = 3.0;
  c.system_level = 3;
  c.v_grid = {2, 3};
  c.members.count = 2;
  c.certification.trials = 20;
  const auto t = recovery_pipeline(c);
  for (const auto& r : t.rows) {
    EXPECT_TRUE(r.certified);
    EXPECT_TRUE(std::isfinite(r.max_error));
  }
  c.p = 2.0;
  c.system_level = 5;
  c.v_grid = {4, 6};
  c.measure = "mixed";
  const auto tm = recovery_pipeline(c);
  for (const auto& r : tm.rows) EXPECT_LE(r.max_error, 1.0 + 1e-9);
}

TEST(LinearBaseline, InSubspaceMemberIsExact) {
  std::mt19937_64 g(1);
  const TrigSystem s(1, 5);
  const auto idx = cube_indices(s, 3);
  ASSERT_EQ(idx.size(), 5u);
  const auto pts = draw_random_points(1, 40, 3);
  CoefficientVector a;
  for (std::size_t i : idx) a.set(i, gaussian(g));
  const auto fit = least_squares_recovery(s, pts, evaluate(s, a, pts), idx);
  EXPECT_LE(continuous_l2_norm(s, a - fit.coefficients), 1e-8);
  EXPECT_FALSE(fit.ridge);
}

TEST(LinearBaseline, RefusesUnderdeterminedSystems) {
  const TrigSystem s(1, 3);
  const auto idx = cube_indices(s, 3);
  const auto pts = draw_random_points(1, 3, 1);
  EXPECT_THROW(least_squares_recovery(s, pts, CVector::Zero(3), idx), ParameterError);
  auto c = small_config();
  c.p = 3.0;
  EXPECT_THROW(linear_baseline(c, RateTable{}), ParameterError);
}

TEST(LinearBaseline, SlowerThanNonlinear) {
  const auto c = small_config();
  const auto nl = recovery_pipeline(c);
  const auto lin = linear_baseline(c, nl);
  ASSERT_TRUE(nl.fit && lin.fit);
  for (std::size_t k = 0; k < lin.rows.size(); ++k) {
    EXPECT_LE(lin.rows[k].u, nl.rows[k].v);
    EXPECT_LE(2 * lin.rows[k].u, nl.rows[k].m);
  }
  EXPECT_GT(lin.fit->slope, nl.fit->slope);
}

TEST(Lebesgue, ExactlySparseTargetsAreFlaggedExact) {
  LebesgueConfig c;
  c.system_level = 2;
  c.v = 2;
  c.m = 30;
  c.trials = 5;
  c.perturbation = 0.0;
  const auto t = lebesgue_ensemble(c);
  for (const auto& r : t.rows) {
    EXPECT_TRUE(r.bv_exact);
    EXPECT_TRUE(r.wcga_exact);
  }
  EXPECT_TRUE(t.all_finite);
}

TEST(Lebesgue, PerturbedRatiosAreFinite) {
  LebesgueConfig c;
  c.system_level = 3;
  c.v = 2;
  c.m = 60;
  c.trials = 8;
  const auto t = lebesgue_ensemble(c);
  EXPECT_TRUE(t.all_finite);
  for (const auto& r : t.rows) {
    EXPECT_GT(r.sigma_inf, 0.0);
    EXPECT_GT(r.sigma_mixed, 0.0);
    EXPECT_LE(r.sigma_mixed, r.sigma_inf * (1.0 + 1e-6));  // an L_p norm of a probability measure sits below sup
  }
  EXPECT_EQ(t.wcga_inf.count, 8u);
}

TEST(Lebesgue, CapIsEnforced) {
  LebesgueConfig c;
  c.system_level = 5;
  c.v = 4;
  c.cap = 1000;
  EXPECT_THROW(lebesgue_ensemble(c), CapExceeded);
}

TEST(Quantile, NearestRank) {
  const auto q = quantiles({5, 1, 4, 2, 3, kNaN});
  EXPECT_EQ(q.count, 5u);
  EXPECT_EQ(q.min, 1.0);
  EXPECT_EQ(q.median, 3.0);
  EXPECT_EQ(q.q90, 5.0);
  EXPECT_EQ(q.max, 5.0);
  EXPECT_TRUE(std::isnan(quantiles({}).median));
}

TEST(OracleCompare, GreedyNeverBeatsEnumerationAndBvMatches) {
  for (double p : {2.0, 3.0}) {
    OracleConfig c;
    c.instances = 10;
    c.p = p;
    const auto t = oracle_compare(c);
    EXPECT_EQ(t.rows.size(), 30u);
    EXPECT_EQ(t.dominance_failures, 0u);
    EXPECT_EQ(t.bv_mismatches, 0u);
  }
}

TEST(Config, UnknownAndMistypedFieldsAreNamed) {
  try {
    experiment_config_from_json(nlohmann::json::parse(R"({"class": {"r": 1, "betta": 1}})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("class.betta"), std::string::npos);
  }
  try {
    experiment_config_from_json(nlohmann::json::parse(R"({"p": "two"})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("p"), std::string::npos);
  }
  EXPECT_THROW(experiment_config_from_json(nlohmann::json::parse(R"({"v_grid": [8, 4]})")), ConfigError);
  EXPECT_THROW(experiment_config_from_json(nlohmann::json::parse(R"({"measure": "other"})")), ConfigError);
  EXPECT_THROW(lebesgue_config_from_json(nlohmann::json::parse(R"({"trials": 0})")), ConfigError);
  EXPECT_THROW(oracle_config_from_json(nlohmann::json::parse(R"({"v_max": 40})")), ConfigError);
  const auto c = experiment_config_from_json(nlohmann::json::parse(R"({"v_grid": [2, 3], "greedy": {"budget": "cgt2"}})"));
  EXPECT_EQ(c.v_grid.size(), 2u);
  EXPECT_EQ(c.greedy.budget, "cgt2");
}
