#pragma once

#include <gmp.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "coinsieve/rational.hpp"

namespace coinsieve {

/// Minimal value-semantic wrapper over an MPFR number. Precision is fixed
/// per object; binary operations produce the larger operand precision.
/// All operations round to nearest.
class MpFloat {
 public:
  explicit MpFloat(mpfr_prec_t bits = 128) {
    mpfr_init2(v_, bits);
    mpfr_set_zero(v_, 1);
  }
  MpFloat(double x, mpfr_prec_t bits) {
    mpfr_init2(v_, bits);
    mpfr_set_d(v_, x, MPFR_RNDN);
  }
  MpFloat(const Rational& x, mpfr_prec_t bits) {
    mpfr_init2(v_, bits);
    mpfr_set_q(v_, x.get_mpq_t(), MPFR_RNDN);
  }
  MpFloat(const MpFloat& other) {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  MpFloat(MpFloat&& other) noexcept {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_swap(v_, other.v_);
  }
  MpFloat& operator=(const MpFloat& other) {
    if (this != &other) {
      mpfr_set_prec(v_, mpfr_get_prec(other.v_));
      mpfr_set(v_, other.v_, MPFR_RNDN);
    }
    return *this;
  }
  MpFloat& operator=(MpFloat&& other) noexcept {
    mpfr_swap(v_, other.v_);
    return *this;
  }
  ~MpFloat() { mpfr_clear(v_); }

  static MpFloat pi(mpfr_prec_t bits) {
    MpFloat out(bits);
    mpfr_const_pi(out.v_, MPFR_RNDN);
    return out;
  }

  static MpFloat ratio(long num, long den, mpfr_prec_t bits) {
    MpFloat out(bits);
    mpfr_set_si(out.v_, num, MPFR_RNDN);
    mpfr_div_si(out.v_, out.v_, den, MPFR_RNDN);
    return out;
  }

  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }

  // Natural log of |x| as a double; -inf for zero. Safe far outside the
  // double exponent range.
  double log_abs() const {
    if (is_zero()) return -INFINITY;
    long exp2 = 0;
    double mant = mpfr_get_d_2exp(&exp2, v_, MPFR_RNDN);
    return std::log(std::fabs(mant)) + static_cast<double>(exp2) * std::log(2.0);
  }

  std::string str(int digits = 20) const {
    if (is_zero()) return "0";
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.*Rg", digits, v_);
    std::string out(buf);
    mpfr_free_str(buf);
    return out;
  }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

#define COINSIEVE_MP_BINOP(op, fn)                                             \
  friend MpFloat operator op(const MpFloat& a, const MpFloat& b) {            \
    MpFloat out(std::max(a.precision(), b.precision()));                      \
    fn(out.v_, a.v_, b.v_, MPFR_RNDN);                                         \
    return out;                                                                \
  }                                                                            \
  MpFloat& operator op##=(const MpFloat& b) {                                  \
    if (b.precision() > precision()) mpfr_prec_round(v_, b.precision(), MPFR_RNDN); \
    fn(v_, v_, b.v_, MPFR_RNDN);                                               \
    return *this;                                                              \
  }
  COINSIEVE_MP_BINOP(+, mpfr_add)
  COINSIEVE_MP_BINOP(-, mpfr_sub)
  COINSIEVE_MP_BINOP(*, mpfr_mul)
  COINSIEVE_MP_BINOP(/, mpfr_div)
#undef COINSIEVE_MP_BINOP

  friend MpFloat operator-(const MpFloat& a) {
    MpFloat out(a.precision());
    mpfr_neg(out.v_, a.v_, MPFR_RNDN);
    return out;
  }
  friend MpFloat operator*(const MpFloat& a, double b) {
    MpFloat out(a.precision());
    mpfr_mul_d(out.v_, a.v_, b, MPFR_RNDN);
    return out;
  }

  friend bool operator<(const MpFloat& a, const MpFloat& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
  friend bool operator>(const MpFloat& a, const MpFloat& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }

#define COINSIEVE_MP_UNARY(name, fn)            \
  friend MpFloat name(const MpFloat& a) {       \
    MpFloat out(a.precision());                 \
    fn(out.v_, a.v_, MPFR_RNDN);                \
    return out;                                 \
  }
  COINSIEVE_MP_UNARY(sin, mpfr_sin)
  COINSIEVE_MP_UNARY(cos, mpfr_cos)
  COINSIEVE_MP_UNARY(atan, mpfr_atan)
  COINSIEVE_MP_UNARY(log, mpfr_log)
  COINSIEVE_MP_UNARY(exp, mpfr_exp)
  COINSIEVE_MP_UNARY(sqrt, mpfr_sqrt)
  COINSIEVE_MP_UNARY(fabs, mpfr_abs)
#undef COINSIEVE_MP_UNARY

 private:
  mpfr_t v_;
};

}  // namespace coinsieve
