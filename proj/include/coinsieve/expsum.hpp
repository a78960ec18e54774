#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "coinsieve/errors.hpp"
#include "coinsieve/measure.hpp"
#include "coinsieve/mpfloat.hpp"
#include "coinsieve/number_theory.hpp"
#include "coinsieve/rational.hpp"
#include "coinsieve/residue_dp.hpp"

namespace coinsieve {

// rho + (1 - rho) e(theta), with e(theta) = exp(2 pi i theta).
inline std::complex<double> unit_factor(double theta, double rho) {
  const double angle = 2.0 * std::numbers::pi * theta;
  return {rho + (1.0 - rho) * std::cos(angle), (1.0 - rho) * std::sin(angle)};
}

// 1 - 4 rho (1 - rho) sin^2(pi theta), the squared modulus of unit_factor.
inline double unit_factor_norm2(double theta, double rho) {
  const double s = std::sin(std::numbers::pi * theta);
  return 1.0 - 4.0 * rho * (1.0 - rho) * s * s;
}

enum class RemainderMethod { float_product, exact_rational };
enum class Compression { orbit, none };

inline const char* to_string(RemainderMethod method) {
  return method == RemainderMethod::exact_rational ? "exact-rational" : "float-product";
}

/// R_q = mu[q | n] - 1/q for one modulus, with a rigorous forward-error
/// bound on the float path. `value` and `error_bound` are doubles and can
/// underflow for long products; the log fields stay finite.
struct RemainderEstimate {
  std::uint64_t q = 1;
  unsigned m = 0;
  Rational rho;
  RemainderMethod method = RemainderMethod::float_product;
  unsigned precision_bits = 0;

  double value = 0.0;
  double abs_value = 0.0;
  double error_bound = 0.0;
  double log_abs_value = -INFINITY;   // ln |value|
  double log_error_bound = -INFINITY; // ln error_bound
  std::string value_text = "0";       // value at working precision

  double imag_residual = 0.0;     // |imaginary part| of the lambda sum / q
  double lambda_abs_mean = 0.0;   // (1/q) sum_lambda |prod_j factor|
  double log_max_magnitude = -INFINITY;  // ln M_q(m)
  bool sign_certified = true;     // |value| > error_bound, or exact

  std::optional<Rational> exact;
};

/// Cycles of x -> 2x on the nonzero residues mod q. Every cycle length
/// divides d = ord_q(2), so lambda 2^d = lambda for all lambda.
struct OrbitFactorization {
  std::uint64_t q = 1;
  std::uint64_t order = 1;
  std::vector<std::vector<std::uint32_t>> cycles;

  explicit OrbitFactorization(std::uint64_t modulus) : q(modulus), order(multiplicative_order_of_two(modulus)) {
    require(q < (std::uint64_t{1} << 31), "orbit factorization limited to q < 2^31");
    std::vector<bool> seen(q, false);
    for (std::uint64_t a = 1; a < q; ++a) {
      if (seen[a]) continue;
      std::vector<std::uint32_t> cycle;
      for (std::uint64_t x = a; !seen[x]; x = (2 * x) % q) {
        seen[x] = true;
        cycle.push_back(static_cast<std::uint32_t>(x));
      }
      cycles.push_back(std::move(cycle));
    }
  }
};

namespace detail {

struct DoubleBackend {
  using Real = double;
  unsigned bits = 53;

  double make(double x) const { return x; }
  double ratio(long num, long den) const { return static_cast<double>(num) / static_cast<double>(den); }
  double pi() const { return std::numbers::pi; }
  double from_rational(const Rational& r) const { return r.get_d(); }
  bool representable(const Rational& r) const { return rational_from_double(r.get_d()) == r; }
  static double to_double(double x) { return x; }
  static double log_abs(double x) { return std::log(std::fabs(x)); }
  static std::string str(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }
};

struct MpBackend {
  using Real = MpFloat;
  unsigned bits;

  MpFloat make(double x) const { return MpFloat(x, bits); }
  MpFloat ratio(long num, long den) const { return MpFloat::ratio(num, den, bits); }
  MpFloat pi() const { return MpFloat::pi(bits); }
  MpFloat from_rational(const Rational& r) const { return MpFloat(r, bits); }
  bool representable(const Rational& r) const {
    const BigInt& den = r.get_den();
    if (mpz_popcount(den.get_mpz_t()) != 1) return false;
    return mpz_sizeinbase(BigInt(abs(r.get_num())).get_mpz_t(), 2) <= bits;
  }
  static double to_double(const MpFloat& x) { return x.to_double(); }
  static double log_abs(const MpFloat& x) { return x.log_abs(); }
  std::string str(const MpFloat& x) const { return x.str(static_cast<int>(bits * 0.30103)); }
};

// Neumaier-compensated running sum.
template <class Real>
struct CompensatedSum {
  Real hi, lo;
  explicit CompensatedSum(Real zero) : hi(zero), lo(zero) {}
  void add(const Real& x) {
    Real t = hi + x;
    if (std::fabs(to_d(hi)) >= std::fabs(to_d(x))) lo += (hi - t) + x;
    else lo += (x - t) + hi;
    hi = t;
  }
  Real total() const { return hi + lo; }

 private:
  static double to_d(const double& x) { return x; }
  static double to_d(const MpFloat& x) { return x.to_double(); }
};

// Bound on |computed - exact| for a compensated sum of k terms whose
// absolute values sum to `abs_sum` (Higham, Thm 4.8, with slack).
inline double compensated_sum_error(double u, std::size_t k, double abs_sum) {
  const double kd = static_cast<double>(k);
  return (2.0 * u + 4.0 * kd * kd * u * u) * abs_sum;
}

// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

/// log|f(a/q)| and arg f(a/q) for every residue, f(theta) = rho + (1-rho) e(theta),
/// plus a per-residue bound on the error of both numbers.
///
/// With t = a'/q in (0, 1/2), a' = min(a, q - a):
///   |f|^2 = cos^2(pi t) + (2 rho - 1)^2 sin^2(pi t)
///   arg f = pi t - atan((2 rho - 1) tan(pi t)),
/// and f(1 - t) = conj f(t). Both terms of |f|^2 are nonnegative and
/// cos(pi t) is evaluated as sin(pi (1/2 - t)) from an exact numerator, so
/// every quantity carries a small relative error even when |f| ~ 1/q.
template <class Backend>
struct FactorTable {
  using Real = typename Backend::Real;
  std::vector<Real> log_mag, phase;
  std::vector<double> err, abs_log, abs_phase;

  FactorTable(const Backend& be, std::uint64_t q, const Rational& rho) {
    using std::atan, std::log, std::sin;
    const double u = std::ldexp(1.0, 1 - static_cast<int>(be.bits));
    const Real rho_r = be.from_rational(rho);
    const Real k = rho_r * be.make(2.0) - be.make(1.0);
    const double rho_err = be.representable(rho) ? 0.0 : u;
    const Real pi = be.pi();
    log_mag.assign(q, be.make(0.0));
    phase.assign(q, be.make(0.0));
    err.assign(q, 0.0);
    abs_log.assign(q, 0.0);
    abs_phase.assign(q, 0.0);
    const long ql = static_cast<long>(q);
    for (long a = 1; 2 * a < ql; ++a) {
      const Real s = sin(pi * be.ratio(a, ql));
      const Real c = sin(pi * be.ratio(ql - 2 * a, 2 * ql));
      const Real ks = k * s;
      const Real mag2 = c * c + ks * ks;
      Real lm = log(mag2) * 0.5;
      Real ph = pi * be.ratio(a, ql) - atan(ks / c);
      const double lm_d = Backend::to_double(lm);
      const double mod = std::exp(lm_d);
      const double e = 32.0 * u + u * std::fabs(lm_d) + 2.0 * rho_err / mod;
      const double ph_d = Backend::to_double(ph);
      const auto mirror = static_cast<std::size_t>(ql - a);
      const auto idx = static_cast<std::size_t>(a);
      err[idx] = err[mirror] = e;
      abs_log[idx] = abs_log[mirror] = std::fabs(lm_d);
      abs_phase[idx] = abs_phase[mirror] = std::fabs(ph_d);
      log_mag[mirror] = lm;
      phase[mirror] = -ph;
      log_mag[idx] = std::move(lm);
      phase[idx] = std::move(ph);
    }
  }
};

// Product prod_j f(lambda 2^j / q) in log-polar form with error bounds.
template <class Real>
struct LogPolar {
  Real log_mag;
  Real phase;
  double log_err = 0.0;
  double phase_err = 0.0;
};

template <class Backend>
class ProductEvaluator {
 public:
  using Real = typename Backend::Real;

  ProductEvaluator(const Backend& be, std::uint64_t q, const Rational& rho, unsigned m, Compression mode)
      : be_(be), q_(q), m_(m), mode_(mode), u_(std::ldexp(1.0, 1 - static_cast<int>(be.bits))), table_(be, q, rho) {}

  // Calls visit(lambda, LogPolar) for lambda = 1 .. q-1 in a fixed order.
  template <class Visit>
  void for_each(Visit&& visit) const {
    if (mode_ == Compression::none) {
      for (std::uint64_t lambda = 1; lambda < q_; ++lambda) visit(lambda, direct(lambda));
      return;
    }
    const OrbitFactorization orbits(q_);
    for (const auto& cycle : orbits.cycles) visit_cycle(cycle, visit);
  }

 private:
  LogPolar<Real> direct(std::uint64_t lambda) const {
    CompensatedSum<Real> lsum(be_.make(0.0)), psum(be_.make(0.0));
    double abs_l = 0.0, abs_p = 0.0, e = 0.0;
    std::uint64_t a = lambda % q_;
    for (unsigned j = 0; j < m_; ++j) {
      lsum.add(table_.log_mag[a]);
      psum.add(table_.phase[a]);
      abs_l += table_.abs_log[a];
      abs_p += table_.abs_phase[a];
      e += table_.err[a];
      a = (2 * a) % q_;
    }
    LogPolar<Real> out{lsum.total(), psum.total()};
    out.log_err = e + compensated_sum_error(u_, m_, abs_l) + u_ * std::fabs(Backend::to_double(out.log_mag));
    out.phase_err = e + compensated_sum_error(u_, m_, abs_p) + u_ * std::fabs(Backend::to_double(out.phase));
    return out;
  }

  // With L = |cycle|, m = K L + r: the product over j < m is the full
  // cycle product to the power K times a window of r consecutive factors.
  // Prefix sums over the doubled cycle give every window in O(1).
  template <class Visit>
  void visit_cycle(const std::vector<std::uint32_t>& cycle, Visit&& visit) const {
    const std::size_t L = cycle.size();
    const std::size_t n = 2 * L;
    std::vector<Real> pl, pp;
    pl.reserve(n + 1);
    pp.reserve(n + 1);
    std::vector<double> al(n + 1, 0.0), ap(n + 1, 0.0), pe(n + 1, 0.0);
    CompensatedSum<Real> lsum(be_.make(0.0)), psum(be_.make(0.0));
    pl.push_back(lsum.total());
    pp.push_back(psum.total());
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t a = cycle[i % L];
      lsum.add(table_.log_mag[a]);
      psum.add(table_.phase[a]);
      pl.push_back(lsum.total());
      pp.push_back(psum.total());
      al[i + 1] = al[i] + table_.abs_log[a];
      ap[i + 1] = ap[i] + table_.abs_phase[a];
      pe[i + 1] = pe[i] + table_.err[a];
    }
    const std::uint64_t K = m_ / L;
    const std::size_t r = m_ % L;
    const Real Kr = be_.make(static_cast<double>(K));
    const Real full_l = Kr * pl[L];
    const Real full_p = Kr * pp[L];
    const double Kd = static_cast<double>(K);
    // Prefix entries carry a compensated-sum error plus one rounding of hi + lo.
    auto prefix_err = [&](const std::vector<double>& abs, std::size_t k, double value) {
      return compensated_sum_error(u_, k, abs[k]) + u_ * std::fabs(value);
    };
    const double full_l_err = Kd * (prefix_err(al, L, Backend::to_double(pl[L])) + pe[L]) +
                              u_ * std::fabs(Backend::to_double(full_l));
    const double full_p_err = Kd * (prefix_err(ap, L, Backend::to_double(pp[L])) + pe[L]) +
                              u_ * std::fabs(Backend::to_double(full_p));
    for (std::size_t i = 0; i < L; ++i) {
      LogPolar<Real> out{full_l + (pl[i + r] - pl[i]), full_p + (pp[i + r] - pp[i])};
      const double window_e = pe[i + r] - pe[i];
      const double dl = Backend::to_double(pl[i + r] - pl[i]);
      const double dp = Backend::to_double(pp[i + r] - pp[i]);
      out.log_err = full_l_err + window_e + prefix_err(al, i + r, Backend::to_double(pl[i + r])) +
                    prefix_err(al, i, Backend::to_double(pl[i])) + u_ * std::fabs(dl) +
                    u_ * std::fabs(Backend::to_double(out.log_mag));
      out.phase_err = full_p_err + window_e + prefix_err(ap, i + r, Backend::to_double(pp[i + r])) +
                      prefix_err(ap, i, Backend::to_double(pp[i])) + u_ * std::fabs(dp) +
                      u_ * std::fabs(Backend::to_double(out.phase));
      visit(static_cast<std::uint64_t>(cycle[i]), out);
    }
  }

  const Backend& be_;
  std::uint64_t q_;
  unsigned m_;
  Compression mode_;
  double u_;
  FactorTable<Backend> table_;
};

template <class Backend>
RemainderEstimate remainder_term_impl(const Backend& be, std::uint64_t q, const BiasedBitMeasure& meas,
                                      Compression mode) {
  using Real = typename Backend::Real;
  using std::cos, std::exp, std::sin;
  RemainderEstimate est;
  est.q = q;
  est.m = meas.m();
  est.rho = meas.rho();
  est.method = RemainderMethod::float_product;
  est.precision_bits = be.bits;
  if (q == 1) {
    est.log_max_magnitude = -INFINITY;
    return est;
  }
  const double u = std::ldexp(1.0, 1 - static_cast<int>(be.bits));
  CompensatedSum<Real> re(be.make(0.0)), im(be.make(0.0)), mag(be.make(0.0));
  double log_err_total = -INFINITY;  // ln sum_lambda (per-term error)
  double log_abs_total = -INFINITY;  // ln sum_lambda |term|, for the summation error
  double log_max = -INFINITY;
  ProductEvaluator<Backend> products(be, q, meas.rho(), meas.m(), mode);
  products.for_each([&](std::uint64_t, const LogPolar<Real>& lp) {
    const Real modulus = exp(lp.log_mag);
    re.add(modulus * cos(lp.phase));
    im.add(modulus * sin(lp.phase));
    mag.add(modulus);
    const double lm = Backend::to_double(lp.log_mag);
    log_max = std::max(log_max, lm);
    // |z~ - z| <= e^(T + dT) (expm1(dT) + dPhi + 4u), covering exp/cos/sin rounding.
    const double rel = std::expm1(lp.log_err) + lp.phase_err + 4.0 * u;
    log_err_total = log_add(log_err_total, lm + lp.log_err + std::log(rel));
    log_abs_total = log_add(log_abs_total, lm + lp.log_err);
    // exp may underflow in double; the lost magnitude is then all error.
    if (std::is_same_v<Real, double> && lm < -700.0) log_err_total = log_add(log_err_total, lm + lp.log_err);
  });
  const Real qr = be.make(static_cast<double>(q));
  const Real value = re.total() / qr;
  const Real imag = im.total() / qr;
  const double logq = std::log(static_cast<double>(q));
  // Summation: compensated over q - 1 terms for each of re / im.
  const double sum_slack = std::log(2.0 * u + 4.0 * static_cast<double>(q) * static_cast<double>(q) * u * u);
  double log_bound = log_add(log_err_total, log_abs_total + sum_slack) - logq;
  log_bound = log_add(log_bound, Backend::log_abs(value) + std::log(2.0 * u));
  log_bound += 1e-9;

  est.value = Backend::to_double(value);
  est.abs_value = std::fabs(est.value);
  est.log_abs_value = Backend::log_abs(value);
  est.log_error_bound = log_bound;
  est.error_bound = std::exp(log_bound);
  est.value_text = be.str(value);
  est.imag_residual = std::fabs(Backend::to_double(imag));
  est.lambda_abs_mean = Backend::to_double(mag.total() / qr);
  est.log_max_magnitude = log_max;
  est.sign_certified = est.log_abs_value > log_bound;
  if (Backend::log_abs(imag) > log_bound)
    throw std::logic_error("conjugate symmetry violated beyond the error bound for q=" + std::to_string(q));
  return est;
}

}  // namespace detail

/// R_q = (1/q) sum_{lambda=1}^{q-1} prod_{j<m} (rho + (1-rho) e(lambda 2^j / q)).
/// precision_bits = 53 runs in double; larger values run in MPFR.
inline RemainderEstimate remainder_term(std::uint64_t q, const BiasedBitMeasure& meas, unsigned precision_bits = 128,
                                        Compression mode = Compression::orbit) {
  require(q >= 1 && q % 2 == 1, "modulus q must be odd and positive, got " + std::to_string(q));
  require(precision_bits >= 53, "precision_bits must be at least 53");
  if (precision_bits == 53) return detail::remainder_term_impl(detail::DoubleBackend{}, q, meas, mode);
  return detail::remainder_term_impl(detail::MpBackend{precision_bits}, q, meas, mode);
}

/// R_q on the exact-rational path: mu[q | n] - 1/q from the residue DP.
inline RemainderEstimate remainder_term_exact(std::uint64_t q, const BiasedBitMeasure& meas) {
  require(q >= 1 && q % 2 == 1, "modulus q must be odd and positive, got " + std::to_string(q));
  RemainderEstimate est;
  est.q = q;
  est.m = meas.m();
  est.rho = meas.rho();
  est.method = RemainderMethod::exact_rational;
  Rational r = remainder_exact(meas, q);
  est.value = r.get_d();
  est.abs_value = std::fabs(est.value);
  est.log_abs_value = sgn(r) == 0 ? -INFINITY : MpFloat(r, 64).log_abs();
  est.value_text = r.get_str();
  est.exact = std::move(r);
  return est;
}

struct OrbitMagnitude {
  double log_value = 0.0;  // ln M_q(m)
  double log_error = 0.0;  // bound on |computed - true| of log_value
  double value() const { return std::exp(log_value); }
};

/// M_q(m) = max_{1<=lambda<q} |prod_{j<m} (rho + (1-rho) e(lambda 2^j / q))|.
inline OrbitMagnitude max_orbit_magnitude(std::uint64_t q, const BiasedBitMeasure& meas, unsigned precision_bits = 53) {
  require(q >= 3 && q % 2 == 1, "max_orbit_magnitude needs odd q >= 3");
  require(precision_bits >= 53, "precision_bits must be at least 53");
  OrbitMagnitude out{-INFINITY, 0.0};
  auto run = [&](const auto& be) {
    detail::ProductEvaluator products(be, q, meas.rho(), meas.m(), Compression::orbit);
    using Be = std::decay_t<decltype(be)>;
    products.for_each([&](std::uint64_t, const auto& lp) {
      out.log_value = std::max(out.log_value, Be::to_double(lp.log_mag));
      out.log_error = std::max(out.log_error, lp.log_err);
    });
  };
  if (precision_bits == 53) run(detail::DoubleBackend{});
  else run(detail::MpBackend{precision_bits});
  // Rounding of the final conversion to double.
  out.log_error += std::fabs(out.log_value) * 0x1.0p-52;
  return out;
}

/// max_{0<=j<window_len} sin^2(pi lambda 2^j / q).
inline double window_max_sin2(std::uint64_t q, std::uint64_t lambda, unsigned window_len) {
  require(q >= 3 && q % 2 == 1, "window bound needs odd q >= 3");
  require(lambda % q != 0, "lambda must be nonzero mod q");
  require(window_len >= 1, "window_len must be positive");
  double best = 0.0;
  std::uint64_t a = lambda % q;
  for (unsigned j = 0; j < window_len; ++j) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(a) / static_cast<double>(q));
    best = std::max(best, s * s);
    a = (2 * a) % q;
  }
  return best;
}

// Integer certificate for window_max_sin2 >= 1/2: some residue
// r = lambda 2^j mod q in the window has q <= 4r <= 3q, i.e. ||r/q|| >= 1/4.
inline bool window_reaches_quarter(std::uint64_t q, std::uint64_t lambda, unsigned window_len) {
  std::uint64_t a = lambda % q;
  for (unsigned j = 0; j < window_len; ++j) {
    if (4 * a >= q && 4 * a <= 3 * q) return true;
    a = (2 * a) % q;
  }
  return false;
}

inline unsigned ceil_log2(std::uint64_t q) {
  unsigned k = 0;
  while ((std::uint64_t{1} << k) < q) ++k;
  return k;
}

struct DecayRow {
  unsigned m = 0;
  RemainderEstimate estimate;
  bool in_regime = false;  // log q <= sqrt(m log 2)
};

struct DecayTable {
  std::uint64_t q = 1;
  std::vector<DecayRow> rows;
  // Least-squares slope of -ln|R_q| against m over rows with m > 0.
  double decay_rate = 0.0;
};

inline constexpr unsigned kDecayExactMaxBits = 64;

/// |R_q| along a list of bit counts, with the fitted exponential rate.
/// Diagnostic only: rows outside the small-q regime are flagged, not rejected.
inline DecayTable small_q_decay_check(std::uint64_t q, const Rational& rho, const std::vector<unsigned>& m_list,
                                      unsigned precision_bits = 128, Arithmetic arithmetic = Arithmetic::exact) {
  DecayTable table;
  table.q = q;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (unsigned m : m_list) {
    const BiasedBitMeasure meas(m, rho, arithmetic);
    DecayRow row{m, remainder_term(q, meas, precision_bits),
                 std::log(static_cast<double>(q)) <= std::sqrt(m * std::log(2.0))};
    // Short rows also carry the exact rational from the residue DP.
    if (arithmetic == Arithmetic::exact && m <= kDecayExactMaxBits) row.estimate.exact = remainder_exact(meas, q);
    if (m > 0 && std::isfinite(row.estimate.log_abs_value)) {
      const double x = m, y = -row.estimate.log_abs_value;
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ++n;
    }
    table.rows.push_back(std::move(row));
  }
  if (n >= 2) table.decay_rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return table;
}

}  // namespace coinsieve
