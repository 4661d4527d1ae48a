#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "wcga/lp_space.hpp"

using namespace wcga;
using namespace testing_support;

TEST(LpNorm, ConstantFunction) {
  EXPECT_DOUBLE_EQ(lp_norm(sampled(CVector::Ones(4)), 2.0), 1.0);
}

TEST(LpNorm, TwoPointExample) {
  CVector v(2);
  v << 3.0, 4.0;
  EXPECT_NEAR(lp_norm(sampled(v), 2.0), std::sqrt(12.5), 1e-15);
  EXPECT_NEAR(std::sqrt(12.5), 3.535534, 1e-6);
}

TEST(LpNorm, UnitCircleValuesHaveNormOneForEveryP) {
  const std::size_t m = 37;
  CVector v(m);
  for (std::size_t i = 0; i < m; ++i) v[static_cast<Eigen::Index>(i)] = std::polar(1.0, kTwoPi * i / m);
  for (double p : {1.0, 1.5, 2.0, 3.0, 4.0, 7.5}) EXPECT_NEAR(lp_norm(sampled(v), p), 1.0, 1e-14) << p;
}

TEST(LpNorm, LengthMismatchIsDimensionError) {
  EXPECT_THROW(SampledFunction(CVector::Ones(3), uniform_measure(4)), DimensionError);
  EXPECT_THROW(weighted_lp_norm(CVector::Ones(3), RVector::Ones(2), 2.0), DimensionError);
}

TEST(LpExponentTest, RejectsBelowOneAndDerivesConjugates) {
  EXPECT_THROW(LpExponent(0.5), ParameterError);
  EXPECT_THROW(LpExponent(std::numeric_limits<double>::infinity()), ParameterError);
  EXPECT_DOUBLE_EQ(LpExponent(3.0).p_star(), 2.0);
  EXPECT_DOUBLE_EQ(LpExponent(3.0).q_star(), 2.0);
  EXPECT_DOUBLE_EQ(LpExponent(1.5).q_star(), 3.0);
  EXPECT_TRUE(std::isinf(LpExponent(1.0).q_star()));
}

TEST(LpNorm, HomogeneityTriangleAndMonotonicity) {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  const double ps[] = {1.0, 1.5, 2.0, 3.0, 4.0};
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = sampled(gaussian_vector(g, 9));
    const auto h = f.with_values(gaussian_vector(g, 9));
    const Complex alpha = std::polar(u(g), u(g));
    for (double p : ps) {
      const double nf = lp_norm(f, p);
      EXPECT_NEAR(lp_norm(f.with_values(alpha * f.values()), p), std::abs(alpha) * nf, 1e-12 * std::abs(alpha) * nf);
      EXPECT_LE(lp_norm(f.with_values(f.values() + h.values()), p), nf + lp_norm(h, p) + 1e-12);
    }
    for (int a = 0; a < 4; ++a) EXPECT_LE(lp_norm(f, ps[a]), lp_norm(f, ps[a + 1]) + 1e-12);
  }
}

TEST(NormingFunctional, HilbertCaseIsNormalizedInnerProduct) {
  std::mt19937_64 g(3);
  const auto f = sampled(gaussian_vector(g, 6));
  const auto h = f.with_values(gaussian_vector(g, 6));
  Complex ip{};
  for (Eigen::Index i = 0; i < 6; ++i) ip += h.values()[i] * std::conj(f.values()[i]) / 6.0;
  const Complex expected = ip / lp_norm(f, 2.0);
  const Complex got = norming_functional_apply(f, h, 2.0);
  EXPECT_NEAR(std::abs(got - expected), 0.0, 1e-14);
}

TEST(NormingFunctional, FourNormTwoPointExample) {
  CVector fv(2), gv(2);
  fv << 1.0, 2.0;
  gv << Complex(0.3, -1.1), Complex(2.0, 0.5);
  const auto f = sampled(fv);
  const auto h = f.with_values(gv);
  const Complex expected = std::pow(8.5, -0.75) * (gv[0] + 8.0 * gv[1]) / 2.0;
  EXPECT_NEAR(std::abs(norming_functional_apply(f, h, 4.0) - expected), 0.0, 1e-14);
  // Peak value is ||f||_4 = 8.5^{1/4}.
  EXPECT_NEAR(norming_functional_apply(f, f, 4.0).real(), std::pow(8.5, 0.25), 1e-14);
  EXPECT_NEAR(lp_norm(f, 4.0), std::pow(8.5, 0.25), 1e-14);
}

TEST(NormingFunctional, PeakAndDualBoundOnRandomPairs) {
  std::mt19937_64 g(5);
  for (double p : {1.0, 1.5, 2.0, 3.0, 4.0}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const auto f = sampled(gaussian_vector(g, 7));
      const auto h = f.with_values(gaussian_vector(g, 7));
      const double nf = lp_norm(f, p);
      const Complex peak = norming_functional_apply(f, f, p);
      EXPECT_NEAR(peak.real(), nf, 1e-10 * nf);
      EXPECT_NEAR(peak.imag(), 0.0, 1e-10 * nf);
      EXPECT_LE(std::abs(norming_functional_apply(f, h, p)), (1.0 + 1e-10) * lp_norm(h, p));
    }
  }
}

TEST(NormingFunctional, OneNormSubgradientIsZeroAtZeros) {
  CVector fv(3);
  fv << 2.0, 0.0, Complex(0.0, -1.0);
  const CVector k = norming_kernel(sampled(fv), 1.0);
  EXPECT_EQ(k[1], Complex{});
  EXPECT_NEAR(std::abs(k[0] - 1.0 / 3.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(k[2] - Complex(0.0, 1.0) / 3.0), 0.0, 1e-15);
}

TEST(NormingFunctional, ZeroElementSignalsZeroResidual) {
  const auto f = sampled(CVector::Zero(4));
  EXPECT_THROW(norming_functional_apply(f, f, 2.0), ZeroResidual);
}

TEST(MixedMeasureNorm, Examples) {
  const auto grid = sampled(CVector::Ones(8));
  const auto pts = sampled(CVector::Ones(5));
  EXPECT_NEAR(mixed_measure_norm(grid, pts, 3.0), 1.0, 1e-15);

  CVector a(4);
  a << 2.0, 2.0, 2.0, 2.0;
  CVector b(3);
  b << Complex(0.0, 2.0), -2.0, 2.0;
  EXPECT_NEAR(mixed_measure_norm(sampled(a), sampled(b), 1.5), 2.0, 1e-14);

  const double c = 1.7;
  for (double p : {1.0, 2.0, 4.0}) {
    EXPECT_NEAR(mixed_measure_norm(sampled(CVector::Zero(6)), sampled(CVector::Constant(3, c)), p), c * std::pow(2.0, -1.0 / p),
                1e-14);
  }
}

TEST(MixedMeasureNorm, AgreesWithMixtureMeasure) {
  std::mt19937_64 g(9);
  const auto mg = uniform_measure(6);
  const auto mp = uniform_measure(4);
  const auto mix = std::make_shared<DiscreteMeasure>(DiscreteMeasure::mixture(*mg, *mp));
  const CVector fg = gaussian_vector(g, 6), fp = gaussian_vector(g, 4);
  CVector both(10);
  both << fg, fp;
  for (double p : {1.5, 3.0}) {
    EXPECT_NEAR(mixed_measure_norm({fg, mg}, {fp, mp}, p), lp_norm({both, mix}, p), 1e-13);
  }
}

TEST(PointSetTest, Invariants) {
  EXPECT_THROW(PointSet(1, {kTwoPi}), ParameterError);
  EXPECT_THROW(PointSet(1, {-0.1}), ParameterError);
  EXPECT_THROW(PointSet(2, {0.1, 0.2, 0.3}), DimensionError);
  EXPECT_THROW(PointSet(1, {}), ParameterError);
  const auto grid = PointSet::uniform_grid(2, 3);
  EXPECT_EQ(grid.size(), 9u);
  EXPECT_DOUBLE_EQ(grid.point(1)[1], kTwoPi / 3.0);
}

TEST(DiscreteMeasureTest, WeightsMustSumToOne) {
  EXPECT_THROW(DiscreteMeasure(PointSet(1, {0.0, 1.0}), RVector::Constant(2, 0.4)), ParameterError);
  EXPECT_THROW(DiscreteMeasure(PointSet(1, {0.0, 1.0}), RVector::Constant(3, 1.0 / 3.0)), DimensionError);
  const auto mix = DiscreteMeasure::mixture(DiscreteMeasure::quadrature(1, 4), DiscreteMeasure::empirical(PointSet(1, {0.5})));
  EXPECT_EQ(mix.size(), 5u);
  EXPECT_EQ(mix.first_component_size(), 4u);
  EXPECT_NEAR(mix.weights()[4], 0.5, 1e-15);
}
