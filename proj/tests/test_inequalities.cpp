#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "coinsieve/inequalities.hpp"
#include "coinsieve/mpfloat.hpp"

using namespace coinsieve;

TEST(PowerSine, ZeroAngleIsEquality) {
  const auto c = power_sine_check(0.0, 0.3, 0.7, 20.0);
  EXPECT_TRUE(c.holds);
  EXPECT_EQ(c.lhs, 1.0);
  EXPECT_EQ(c.rhs, 1.0);
}

TEST(PowerSine, HalfTurnFairCoin) {
  const auto c = power_sine_check(0.5, 0.5, 0.5, 4.0);
  EXPECT_TRUE(c.holds);
  EXPECT_EQ(c.lhs, 0.0);
  EXPECT_DOUBLE_EQ(c.rhs, 0.5);
}

TEST(PowerSine, RejectsOutOfRegime) {
  EXPECT_THROW(power_sine_check(0.1, 0.5, 0.5, 1.0), DomainError);
  EXPECT_THROW(power_sine_check(0.1, 0.0, 0.5, 100.0), DomainError);
  EXPECT_THROW(power_sine_check(0.1, 0.5, 1.0, 100.0), DomainError);
  // The probe evaluates anyway; small ell can fail.
  EXPECT_FALSE(power_sine_probe(0.25, 0.01, 0.9, 0.5).holds);
}

TEST(ShiftedSine, HandValue) {
  const auto c = shifted_sine_check(0.0, 0.05, 0.1);
  EXPECT_NEAR(c.rhs - c.lhs, 0.05 - 0.9 * std::pow(std::sin(0.05), 2), 1e-15);
  EXPECT_GE(c.margin, 0.005);
}

TEST(ShiftedSine, SmallShiftLimit) {
  const auto c = shifted_sine_probe(1.0, 1e-12, 0.5);
  EXPECT_NEAR(c.rhs, c.lhs, 1e-11);
  EXPECT_THROW(shifted_sine_check(1.0, 0.2, 0.5), DomainError);
}

TEST(ShiftedSine, MarginMatchesHighPrecision) {
  for (double theta : {0.0, 0.3, 0.785, 2.0, 5.5})
    for (double gamma : {1e-9, 1e-4, 0.05, 0.099}) {
      const double delta = 0.2;
      const unsigned bits = 256;
      const MpFloat th(theta, bits), ga(gamma, bits), de(delta, bits), one(1.0, bits);
      const MpFloat sa = sin(th), sb = sin(th + ga);
      const MpFloat exact = ga - (one - de) * (sb * sb - sa * sa);
      const auto c = shifted_sine_probe(theta, gamma, delta);
      ASSERT_NEAR(c.margin, exact.to_double(), 1e-15 * gamma) << theta << " " << gamma;
      ASSERT_GE(c.margin, delta * gamma * (1 - 1e-12));
    }
}

TEST(PropertySuite, NoViolations) {
  const auto rep = inequality_property_suite(20000, 1);
  EXPECT_EQ(rep.samples, 20000u);
  EXPECT_EQ(rep.power_sine_violations, 0u);
  EXPECT_EQ(rep.shifted_sine_violations, 0u);
  EXPECT_GE(rep.shifted_sine_min_margin_ratio, 1 - 1e-12);
  EXPECT_GE(rep.power_sine_min_margin, 0.0);
}

TEST(PropertySuite, ThreadInvariant) {
  const auto a = inequality_property_suite(150000, 9, 1), b = inequality_property_suite(150000, 9, 3);
  EXPECT_EQ(a.power_sine_min_margin, b.power_sine_min_margin);
  EXPECT_EQ(a.shifted_sine_min_margin_ratio, b.shifted_sine_min_margin_ratio);
}

TEST(ProductIntegral, SingleFactor) {
  const auto r = product_integral_identity(1, 0.0, 32);
  EXPECT_NEAR(r.numeric, 0.5, 1e-15);
  EXPECT_EQ(r.closed_form, 0.5);
}

TEST(ProductIntegral, ClosedForm) {
  for (unsigned h : {8u, 12u})
    for (double delta : {0.01, 0.1}) {
      const auto r = product_integral_identity(h, delta, std::uint64_t{1} << (h + 4));
      EXPECT_NEAR(r.numeric, std::pow((1 + 3 * delta) / 2, h), 1e-10);
    }
}

TEST(ProductIntegral, RejectsCoarseGrid) {
  EXPECT_THROW(product_integral_identity(8, 0.1, 1u << 10), DomainError);
  EXPECT_THROW(product_integral_identity(8, 0.1, 3000), DomainError);
}

TEST(BoundParams, ThresholdIsEvenAndAbove) {
  const auto p = make_bound_params(0.75, 0.05, 64);
  EXPECT_EQ(p.t_holder, 64u);
  EXPECT_EQ(p.h, 12u);
  EXPECT_GT(p.t_holder, 4 * std::log(20.0) / (0.75 * 0.25));
  EXPECT_DOUBLE_EQ(p.beta, 0.05 / 4 / 4096);
}

TEST(HolderChain, OrderingAtSmallQ) {
  const auto params = make_bound_params(0.75, 0.05, 16);
  const auto rep = holder_chain_diagnostic(rational(3, 4), 16, params);
  EXPECT_EQ(rep.m, params.t_holder * params.h / 2);
  EXPECT_TRUE(rep.ordering_holds());
  EXPECT_FALSE(rep.final_below_target);
  EXPECT_LE(rep.true_sum, rep.triangle_sum);
}

TEST(HolderChain, RejectsSmallExponent) {
  auto params = make_bound_params(0.75, 0.05, 16);
  params.t_holder = 10;
  EXPECT_THROW(holder_chain_diagnostic(rational(3, 4), 16, params), DomainError);
}
