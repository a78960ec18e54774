#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>
#include <string_view>

#include "coinsieve/errors.hpp"

namespace coinsieve {

using Rational = mpq_class;
using BigInt = mpz_class;

/// An exact probability: a rational in [0, 1] kept in lowest terms.
class ExactProb {
 public:
  ExactProb() : value_(0) {}

  explicit ExactProb(Rational value) : value_(std::move(value)) {
    value_.canonicalize();
    require(sgn(value_) >= 0 && value_ <= 1, "probability outside [0, 1]: " + value_.get_str());
  }

  const Rational& value() const { return value_; }
  double to_double() const { return value_.get_d(); }
  std::string str() const { return value_.get_str(); }

  friend bool operator==(const ExactProb& a, const ExactProb& b) { return a.value_ == b.value_; }
  friend bool operator==(const ExactProb& a, const Rational& b) { return a.value_ == b; }

 private:
  Rational value_;
};

inline Rational rational(long num, unsigned long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// Exact rational value of a finite double.
inline Rational rational_from_double(double x) {
  require(std::isfinite(x), "non-finite value");
  Rational r(x);
  r.canonicalize();
  return r;
}

// Parses "a/b" or an integer. Decimals are rejected here; callers that
// accept them route through the float path explicitly.
inline Rational parse_rational(std::string_view text) {
  Rational r;
  if (r.set_str(std::string(text), 10) != 0 || r.get_den() == 0)
    throw DomainError("not a rational number: " + std::string(text));
  r.canonicalize();
  return r;
}

inline BigInt pow_ui(const BigInt& base, unsigned long exp) {
  BigInt out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exp);
  return out;
}

inline Rational pow_ui(const Rational& base, unsigned long exp) {
  return Rational(pow_ui(BigInt(base.get_num()), exp), pow_ui(BigInt(base.get_den()), exp));
}

}  // namespace coinsieve
