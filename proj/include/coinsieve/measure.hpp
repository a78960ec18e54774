#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "coinsieve/errors.hpp"
#include "coinsieve/rational.hpp"
#include "coinsieve/rng.hpp"

namespace coinsieve {

/// Whether a probability was supplied as an exact rational ("3/4") or as
/// a decimal ("0.75"). Decimal inputs are stored as the exact value of the
/// nearest double; the tag only selects which arithmetic a caller reports.
enum class Arithmetic { exact, floating };

/// The biased-coin convolution measure on {0, ..., 2^m - 1}: binary digits
/// are independent with P[digit = 0] = rho, so
///   mu(n) = rho^(m - popcount(n)) * (1 - rho)^popcount(n).
class BiasedBitMeasure {
 public:
  BiasedBitMeasure(unsigned m, Rational rho) : BiasedBitMeasure(m, std::move(rho), Arithmetic::exact) {}
  BiasedBitMeasure(unsigned m, double rho)
      : BiasedBitMeasure(m, rational_from_double(rho), Arithmetic::floating) {}

  BiasedBitMeasure(unsigned m, Rational rho, Arithmetic arithmetic)
      : m_(m), rho_(std::move(rho)), arithmetic_(arithmetic) {
    rho_.canonicalize();
    require(rho_ >= Rational(1, 2) && rho_ < 1, "rho must satisfy 1/2 <= rho < 1, got " + rho_.get_str());
    rho_d_ = rho_.get_d();
  }

  unsigned m() const { return m_; }
  const Rational& rho() const { return rho_; }
  double rho_double() const { return rho_d_; }
  Arithmetic arithmetic() const { return arithmetic_; }
  bool is_uniform() const { return rho_ == Rational(1, 2); }

  BiasedBitMeasure with_bits(unsigned m) const { return BiasedBitMeasure(m, rho_, arithmetic_); }

 private:
  unsigned m_;
  Rational rho_;
  double rho_d_ = 0.5;
  Arithmetic arithmetic_;
};

inline unsigned popcount(const BigInt& n) { return static_cast<unsigned>(mpz_popcount(n.get_mpz_t())); }

inline ExactProb point_mass(const BiasedBitMeasure& meas, const BigInt& n) {
  require(sgn(n) >= 0 && (sgn(n) == 0 || mpz_sizeinbase(n.get_mpz_t(), 2) <= meas.m()),
          "n must lie in [0, 2^m)");
  const unsigned ones = popcount(n);
  return ExactProb(pow_ui(meas.rho(), meas.m() - ones) * pow_ui(Rational(1 - meas.rho()), ones));
}

inline ExactProb point_mass(const BiasedBitMeasure& meas, std::uint64_t n) {
  return point_mass(meas, BigInt(std::to_string(n)));
}

inline double point_mass_float(const BiasedBitMeasure& meas, std::uint64_t n) {
  require(meas.m() >= 64 || n < (std::uint64_t{1} << meas.m()), "n must lie in [0, 2^m)");
  const int ones = std::popcount(n);
  const double rho = meas.rho_double();
  return std::pow(rho, static_cast<int>(meas.m()) - ones) * std::pow(1.0 - rho, ones);
}

/// Draws `count` integers sum_{j<m} xi_j 2^j with P[xi_j = 0] = rho_zero.
/// Unlike BiasedBitMeasure this accepts the degenerate coin rho_zero = 1.
inline std::vector<std::uint64_t> sample_bits(unsigned m, double rho_zero, std::uint64_t seed, std::size_t count) {
  require(m >= 1 && m <= 64, "sampling supports 1 <= m <= 64");
  require(rho_zero >= 0.0 && rho_zero <= 1.0, "rho must lie in [0, 1]");
  Rng rng(seed);
  const double p_one = 1.0 - rho_zero;
  std::vector<std::uint64_t> out(count);
  for (auto& n : out) {
    std::uint64_t value = 0;
    for (unsigned j = 0; j < m; ++j)
      if (rng.bernoulli(p_one)) value |= std::uint64_t{1} << j;
    n = value;
  }
  return out;
}

inline std::vector<std::uint64_t> sample(const BiasedBitMeasure& meas, std::uint64_t seed, std::size_t count) {
  return sample_bits(meas.m(), meas.rho_double(), seed, count);
}

// (rho log 1/rho + (1-rho) log 1/(1-rho)) / log 2: Hausdorff dimension of
// the digit measure in base 2.
inline double digit_entropy_dimension(double rho) {
  require(rho >= 0.5 && rho < 1.0, "dimension requires 1/2 <= rho < 1");
  const double s = 1.0 - rho;
  return (-rho * std::log(rho) - s * std::log(s)) / std::log(2.0);
}

// (1-rho) log 1/(1-rho): only the contribution of the 1-digits to the
// entropy, without the rho log 1/rho term. Reported next to the full
// digit entropy for comparison.
inline double partial_entropy_dimension(double rho) {
  require(rho >= 0.5 && rho < 1.0, "dimension requires 1/2 <= rho < 1");
  const double s = 1.0 - rho;
  return -s * std::log(s);
}

inline double digit_entropy_dimension(const BiasedBitMeasure& meas) { return digit_entropy_dimension(meas.rho_double()); }
inline double partial_entropy_dimension(const BiasedBitMeasure& meas) { return partial_entropy_dimension(meas.rho_double()); }

/// Law of one coefficient xi in {-1, 0, +1} of a random polynomial
/// P(z) = sum_{j=0}^{m} xi_j z^j, together with the degree bound m.
class TernaryCoeffDist {
 public:
  TernaryCoeffDist(Rational minus, Rational zero, Rational plus, unsigned m)
      : probs_{std::move(minus), std::move(zero), std::move(plus)}, m_(m) {
    for (auto& p : probs_) {
      p.canonicalize();
      require(sgn(p) >= 0 && p <= 1, "coefficient probabilities must lie in [0, 1]");
    }
    require(probs_[0] + probs_[1] + probs_[2] == 1, "coefficient probabilities must sum to 1");
  }

  static TernaryCoeffDist uniform(unsigned m) {
    return TernaryCoeffDist(Rational(1, 3), Rational(1, 3), Rational(1, 3), m);
  }

  // Digit value -1, 0, +1 -> probability.
  const Rational& prob(int digit) const { return probs_[static_cast<std::size_t>(digit + 1)]; }
  double prob_double(int digit) const { return prob(digit).get_d(); }
  unsigned m() const { return m_; }
  unsigned coefficient_count() const { return m_ + 1; }

  const Rational& max_prob() const {
    const Rational* best = &probs_[0];
    for (const auto& p : probs_)
      if (p > *best) best = &p;
    return *best;
  }

  TernaryCoeffDist with_degree(unsigned m) const { return TernaryCoeffDist(probs_[0], probs_[1], probs_[2], m); }

 private:
  std::array<Rational, 3> probs_;
  unsigned m_;
};

}  // namespace coinsieve
