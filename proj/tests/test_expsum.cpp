#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "coinsieve/expsum.hpp"
#include "coinsieve/residue_dp.hpp"

using namespace coinsieve;

namespace {

using cld = std::complex<long double>;

// Direct evaluation of (1/q) sum_{lambda} prod_j (rho + (1-rho) e(lambda 2^j / q)).
long double direct_remainder(std::uint64_t q, unsigned m, long double rho) {
  cld total = 0;
  for (std::uint64_t lambda = 1; lambda < q; ++lambda) {
    cld prod = 1;
    std::uint64_t a = lambda;
    for (unsigned j = 0; j < m; ++j) {
      const long double ang = 2 * std::numbers::pi_v<long double> * a / q;
      prod *= cld(rho + (1 - rho) * std::cos(ang), (1 - rho) * std::sin(ang));
      a = 2 * a % q;
    }
    total += prod;
  }
  return total.real() / q;
}

long double direct_max_magnitude(std::uint64_t q, unsigned m, long double rho) {
  long double best = 0;
  for (std::uint64_t lambda = 1; lambda < q; ++lambda) {
    long double prod = 1;
    std::uint64_t a = lambda;
    for (unsigned j = 0; j < m; ++j) {
      const long double ang = 2 * std::numbers::pi_v<long double> * a / q;
      prod *= std::abs(cld(rho + (1 - rho) * std::cos(ang), (1 - rho) * std::sin(ang)));
      a = 2 * a % q;
    }
    best = std::max(best, prod);
  }
  return best;
}

}  // namespace

TEST(UnitFactor, SpecialAngles) {
  EXPECT_NEAR(std::abs(unit_factor(0.0, 0.7) - std::complex<double>(1.0, 0.0)), 0.0, 1e-16);
  EXPECT_NEAR(std::abs(unit_factor(0.5, 0.5)), 0.0, 1e-16);
  EXPECT_NEAR(unit_factor_norm2(1.0 / 3.0, 0.5), 0.25, 1e-15);
  EXPECT_NEAR(std::norm(unit_factor(1.0 / 3.0, 0.5)), 0.25, 1e-15);
}

TEST(UnitFactor, MagnitudeIdentityRandom) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> th(-3.0, 3.0), rh(0.5, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double theta = th(gen), rho = rh(gen);
    const long double ang = 2 * std::numbers::pi_v<long double> * theta;
    const long double re = rho + (1 - rho) * std::cos(ang), im = (1 - rho) * std::sin(ang);
    ASSERT_NEAR(unit_factor_norm2(theta, rho), static_cast<double>(re * re + im * im), 1e-14);
  }
}

TEST(Remainder, TrivialModulus) {
  const auto est = remainder_term(1, BiasedBitMeasure(5, rational(3, 4)));
  EXPECT_EQ(est.value, 0.0);
  EXPECT_EQ(remainder_term_exact(1, BiasedBitMeasure(5, rational(3, 4))).exact, Rational(0));
}

TEST(Remainder, FourAtomValue) {
  const BiasedBitMeasure meas(2, rational(1, 2));
  EXPECT_EQ(*remainder_term_exact(3, meas).exact, rational(1, 6));
  const auto est = remainder_term(3, meas);
  EXPECT_LE(std::fabs(est.value - 1.0 / 6.0), est.error_bound + 1e-17);
  EXPECT_EQ(est.value_text.substr(0, 12), "0.1666666666");
}

TEST(Remainder, EmptyProduct) {
  for (std::uint64_t q : {3u, 15u, 49u}) {
    const auto est = remainder_term(q, BiasedBitMeasure(0, rational(3, 4)));
    EXPECT_NEAR(est.value, static_cast<double>(q - 1) / q, 1e-15);
  }
}

TEST(Remainder, RejectsEvenModulus) {
  EXPECT_THROW(remainder_term(4, BiasedBitMeasure(3, rational(3, 4))), DomainError);
  EXPECT_THROW(remainder_term(3, BiasedBitMeasure(3, rational(3, 4)), 40), DomainError);
}

TEST(Remainder, AgreesWithExactWithinBound) {
  for (unsigned bits : {53u, 128u, 256u})
    for (const Rational& rho : {rational(1, 2), rational(3, 4), rational(9, 10)})
      for (std::uint64_t q : {3u, 9u, 21u, 45u, 97u, 99u}) {
        const BiasedBitMeasure meas(20, rho);
        const auto est = remainder_term(q, meas, bits);
        const Rational exact = remainder_exact(meas, q);
        const double gap = MpFloat(Rational(exact - rational_from_double(est.value)), 256).to_double();
        // value is rounded to double for the comparison; allow its half-ulp.
        ASSERT_LE(std::fabs(gap), est.error_bound + std::fabs(est.value) * 0x1p-53)
            << "bits=" << bits << " q=" << q << " rho=" << rho.get_str();
      }
}

TEST(Remainder, CompressionDoesNotChangeValue) {
  const BiasedBitMeasure meas(37, rational(3, 5));
  for (std::uint64_t q : {7u, 31u, 63u, 91u}) {
    const auto a = remainder_term(q, meas, 128, Compression::orbit);
    const auto b = remainder_term(q, meas, 128, Compression::none);
    EXPECT_LE(std::fabs(a.value - b.value), a.error_bound + b.error_bound);
  }
}

TEST(Remainder, MatchesDirectComplexSum) {
  for (std::uint64_t q : {5u, 11u, 33u})
    for (unsigned m : {3u, 10u}) {
      const auto est = remainder_term(q, BiasedBitMeasure(m, rational(7, 10)), 128);
      EXPECT_NEAR(est.value, static_cast<double>(direct_remainder(q, m, 0.7L)), 1e-15);
    }
}

TEST(Remainder, ImaginaryPartVanishes) {
  const auto est = remainder_term(77, BiasedBitMeasure(30, rational(3, 4)), 128);
  EXPECT_LE(est.imag_residual, est.error_bound);
}

TEST(Remainder, SignCertifiedWhenLarge) {
  EXPECT_TRUE(remainder_term(3, BiasedBitMeasure(10, rational(3, 4)), 128).sign_certified);
}

TEST(Remainder, TinyValuesStayRelative) {
  // At m = 2000 |R_5| is far below the double range; the log-domain value keeps its digits.
  const BiasedBitMeasure meas(2000, rational(3, 4));
  const auto est = remainder_term(5, meas, 128);
  const Rational exact = remainder_exact(meas, 5);
  const double log_exact = MpFloat(exact, 128).log_abs();
  EXPECT_LT(log_exact, -700.0);
  EXPECT_NEAR(est.log_abs_value, log_exact, 1e-12 * std::fabs(log_exact));
  EXPECT_LT(est.log_error_bound, est.log_abs_value - 60);
}

TEST(Remainder, SmallValuesMatchExactly) {
  const BiasedBitMeasure meas(400, rational(3, 4));
  const auto est = remainder_term(5, meas, 128);
  const Rational exact = remainder_exact(meas, 5);
  const double rel = MpFloat(Rational((exact - rational_from_double(est.value)) / exact), 128).to_double();
  EXPECT_LT(std::fabs(rel), 1e-14);
  EXPECT_LT(est.error_bound, 1e-20 * est.abs_value);
}

TEST(OrbitMagnitude, HandValues) {
  EXPECT_NEAR(max_orbit_magnitude(3, BiasedBitMeasure(0, rational(3, 4))).value(), 1.0, 1e-15);
  EXPECT_NEAR(max_orbit_magnitude(3, BiasedBitMeasure(1, rational(1, 2))).value(), 0.5, 1e-15);
}

TEST(OrbitMagnitude, FullPeriodSquares) {
  const double m3 = max_orbit_magnitude(7, BiasedBitMeasure(3, 0.75)).value();
  const double m6 = max_orbit_magnitude(7, BiasedBitMeasure(6, 0.75)).value();
  EXPECT_NEAR(m6, m3 * m3, 1e-15);
}

TEST(OrbitMagnitude, MatchesDirect) {
  for (std::uint64_t q : {9u, 25u, 51u})
    for (unsigned m : {5u, 17u}) {
      const auto mag = max_orbit_magnitude(q, BiasedBitMeasure(m, rational(4, 5)));
      EXPECT_NEAR(mag.log_value, std::log(static_cast<double>(direct_max_magnitude(q, m, 0.8L))), 1e-13);
    }
}

TEST(OrbitMagnitude, Submultiplicative) {
  for (std::uint64_t q = 3; q <= 99; q += 2)
    for (unsigned m : {4u, 16u}) {
      const auto a = max_orbit_magnitude(q, BiasedBitMeasure(m, rational(3, 4)));
      const auto b = max_orbit_magnitude(q, BiasedBitMeasure(2 * m, rational(3, 4)));
      ASSERT_LE(b.log_value, 2 * a.log_value + b.log_error + 2 * a.log_error) << q;
    }
}

TEST(Window, HandValue) {
  EXPECT_NEAR(window_max_sin2(3, 1, 1), 0.75, 1e-15);
  EXPECT_GE(window_max_sin2(17, 1, ceil_log2(17)), 0.5);
  EXPECT_THROW(window_max_sin2(9, 9, 3), DomainError);
}

TEST(Window, CertificateMatchesFloat) {
  for (std::uint64_t q = 3; q <= 301; q += 2)
    for (std::uint64_t lambda = 1; lambda < q; ++lambda) {
      const unsigned len = ceil_log2(q);
      double best = 0;
      std::uint64_t a = lambda;
      for (unsigned j = 0; j < len; ++j) {
        const double s = std::sin(std::numbers::pi * static_cast<double>(a) / q);
        best = std::max(best, s * s);
        a = 2 * a % q;
      }
      ASSERT_EQ(window_reaches_quarter(q, lambda, len), best >= 0.5 - 1e-12) << q << " " << lambda;
      ASSERT_NEAR(window_max_sin2(q, lambda, len), best, 1e-14);
    }
}

TEST(Decay, StrictlyDecreasing) {
  const auto table = small_q_decay_check(3, rational(3, 4), {8, 16, 32});
  ASSERT_EQ(table.rows.size(), 3u);
  EXPECT_GT(table.rows[0].estimate.abs_value, table.rows[1].estimate.abs_value);
  EXPECT_GT(table.rows[1].estimate.abs_value, table.rows[2].estimate.abs_value);
  EXPECT_GT(table.decay_rate, 0.0);  // slope of -ln|R_q| in m
}

TEST(Decay, ExactRowsAndRegimeFlag) {
  const auto table = small_q_decay_check(3, rational(1, 2), {0, 2, 4});
  EXPECT_EQ(*table.rows[1].estimate.exact, rational(1, 6));
  EXPECT_EQ(*table.rows[2].estimate.exact, remainder_exact(BiasedBitMeasure(4, rational(1, 2)), 3));
  EXPECT_NEAR(table.rows[0].estimate.value, 2.0 / 3.0, 1e-15);
  EXPECT_FALSE(table.rows[0].in_regime);
}
