#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include "coinsieve/number_theory.hpp"
#include "coinsieve/residue_dp.hpp"
#include "coinsieve/sieve_lab.hpp"

using namespace coinsieve;

TEST(Sweep, SingleModulus) {
  const auto rep = sweep_remainders(BiasedBitMeasure(2, rational(1, 2)), 3);
  ASSERT_EQ(rep.records.size(), 1u);
  EXPECT_NEAR(rep.cumulative_sum, 1.0 / 6.0, 1e-16);
}

TEST(Sweep, RowsAreOddSquarefree) {
  const auto rep = sweep_remainders(BiasedBitMeasure(32, 0.75), 99);
  ASSERT_EQ(rep.records.size(), 40u);
  double running = 0;
  for (const auto& r : rep.records) {
    EXPECT_TRUE(is_squarefree_trial(r.q));
    EXPECT_EQ(r.q % 2, 1u);
    EXPECT_EQ(r.ord2, multiplicative_order_of_two(r.q));
    running += r.abs_rq;
    EXPECT_DOUBLE_EQ(r.cumulative, running);
  }
}

TEST(Sweep, DecaysWithBits) {
  const auto a = sweep_remainders(BiasedBitMeasure(32, rational(3, 4)), 999, {53});
  const auto b = sweep_remainders(BiasedBitMeasure(64, rational(3, 4)), 999, {53});
  EXPECT_LT(b.cumulative_sum, a.cumulative_sum);
}

TEST(Sweep, ThreadsDoNotChangeBits) {
  const BiasedBitMeasure meas(40, rational(4, 5));
  SweepOptions one, four;
  four.threads = 4;
  const auto a = sweep_remainders(meas, 301, one), b = sweep_remainders(meas, 301, four);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].abs_rq, b.records[i].abs_rq);
    EXPECT_EQ(a.records[i].error_bound, b.records[i].error_bound);
  }
}

TEST(Sweep, WorkBudgetTruncates) {
  SweepOptions opts;
  opts.work_budget = 100;
  const auto rep = sweep_remainders(BiasedBitMeasure(16, rational(3, 4)), 999, opts);
  EXPECT_TRUE(rep.partial);
  EXPECT_EQ(rep.q_cutoff, rep.records.back().q);
  EXPECT_LT(rep.q_cutoff, 100u);
}

TEST(UniformRemainder, MatchesExact) {
  for (std::uint64_t q : {3u, 7u, 15u, 99u}) {
    const double exact = std::fabs(remainder_exact(BiasedBitMeasure(12, rational(1, 2)), q).get_d());
    EXPECT_NEAR(uniform_remainder_abs(12, q), exact, 1e-17);
  }
}

TEST(Multiples, MatchesExact) {
  const BiasedBitMeasure meas(16, rational(3, 4));
  for (std::uint64_t q : {301u, 1001u, 4097u}) {
    const double exact = std::fabs(remainder_exact(meas, q).get_d());
    EXPECT_NEAR(remainder_by_multiples(meas, q), exact, 1e-15);
  }
}

TEST(Exponent, UniformIsLarge) {
  const auto rows = estimate_sieving_exponent(rational(1, 2), {20, 24}, 0.1);
  for (const auto& r : rows) EXPECT_GE(r.alpha_hat, 0.9) << r.m;
}

TEST(Exponent, VacuousThresholdCaps) {
  const auto rows = estimate_sieving_exponent(rational(1, 2), {12}, 1.0);
  EXPECT_EQ(rows[0].alpha_hat, 1.0);
}

TEST(Exponent, BiasLowersExponent) {
  const auto hi = estimate_sieving_exponent(rational(19, 20), {20}, 0.1);
  const auto mid = estimate_sieving_exponent(rational(3, 4), {20}, 0.1);
  EXPECT_LE(hi[0].alpha_hat, mid[0].alpha_hat);
  EXPECT_GT(mid[0].cumulative, 0.0);
}

TEST(Exponent, BudgetMarksPartial) {
  ExponentOptions opts;
  opts.q_budget = 50;
  const auto rows = estimate_sieving_exponent(rational(3, 4), {32}, 0.9, opts);
  EXPECT_TRUE(rows[0].partial);
}

TEST(Pseudoprimes, UniformPrimeCount) {
  const auto rows = pseudoprime_mass(BiasedBitMeasure(20, rational(1, 2)), {1});
  EXPECT_EQ(*rows[0].exact, Rational(82025, 1u << 20));
}

TEST(Pseudoprimes, LargeRCoversEverythingButZeroAndOne) {
  const BiasedBitMeasure meas(10, rational(3, 5));
  const auto rows = pseudoprime_mass(meas, {10});
  EXPECT_EQ(*rows[0].exact, 1 - point_mass(meas, 0).value() - point_mass(meas, 1).value());
}

TEST(Pseudoprimes, BiasedBand) {
  const auto rows = pseudoprime_mass(BiasedBitMeasure(20, rational(3, 5)), {1, 2, 3});
  const double logN = 20 * std::log(2.0);
  EXPECT_GE(rows[0].mass * logN, 0.3);
  EXPECT_LE(rows[0].mass * logN, 3.0);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i].mass, rows[i - 1].mass);
}

TEST(Pseudoprimes, SamplingNearExact) {
  const BiasedBitMeasure meas(20, rational(3, 5));
  PseudoprimeOptions opts;
  opts.exact_max_m = 0;
  opts.samples = 200000;
  opts.seed = 3;
  const auto sampled = pseudoprime_mass(meas, {2}, opts);
  const auto exact = pseudoprime_mass(meas, {2});
  EXPECT_TRUE(sampled[0].sampled);
  EXPECT_NEAR(sampled[0].mass, exact[0].mass, 4 * sampled[0].std_error);
}

TEST(Legendre, EmptySieve) {
  const auto res = legendre_sieve_demo(BiasedBitMeasure(20, rational(3, 4)), 2);
  EXPECT_EQ(res.main_term, 1.0);
  EXPECT_EQ(res.error_budget, 0.0);
}

TEST(Legendre, ExactWithinBudget) {
  const BiasedBitMeasure meas(20, rational(3, 4));
  const auto res = legendre_sieve_demo(meas, 5, 128, true);
  ASSERT_EQ(res.primes, (std::vector<std::uint64_t>{3, 5}));
  // Oracle: direct sum over the support.
  Rational direct = 0;
  for (std::uint64_t n = 0; n < (1u << 20); ++n)
    if (n % 3 && n % 5) direct += point_mass(meas, n).value();
  EXPECT_EQ(*res.exact, direct);
  EXPECT_LE(std::fabs(res.main_term - direct.get_d()), res.error_budget + 1e-15);
  EXPECT_NEAR(res.corrected, direct.get_d(), 1e-14);
}
