#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "coinsieve/errors.hpp"
#include "coinsieve/measure.hpp"
#include "coinsieve/parallel.hpp"
#include "coinsieve/rational.hpp"
#include "coinsieve/residue_dp.hpp"
#include "coinsieve/rng.hpp"

namespace coinsieve {

/// Signed-digit base-3 code, little-endian, digits in {-1, 0, +1}.
struct BalancedTernary {
  std::vector<std::int8_t> digits;

  BigInt value() const {
    BigInt out = 0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) out = out * 3 + *it;
    return out;
  }
};

// An r-digit code covers exactly the integers with 2|n| < 3^r.
inline BalancedTernary to_balanced_ternary(const BigInt& n, unsigned r) {
  require(BigInt(2 * abs(n)) < pow_ui(BigInt(3), r), "value does not fit in " + std::to_string(r) + " balanced-ternary digits");
  BalancedTernary out;
  out.digits.resize(r, 0);
  BigInt x = n, rem;
  for (unsigned j = 0; j < r; ++j) {
    mpz_fdiv_r_ui(rem.get_mpz_t(), x.get_mpz_t(), 3);
    const int d = rem == 2 ? -1 : static_cast<int>(rem.get_si());
    out.digits[j] = static_cast<std::int8_t>(d);
    x = (x - d) / 3;
  }
  return out;
}

inline BalancedTernary to_balanced_ternary(long long n, unsigned r) { return to_balanced_ternary(BigInt(std::to_string(n)), r); }

inline BigInt from_balanced_ternary(const BalancedTernary& code) { return code.value(); }

/// The t in [1/2, 1) with t^t (1-t)^(1-t) = c, for c in [1/2, 1).
/// t ln t + (1-t) ln(1-t) is strictly increasing there, so bisection
/// brackets the root; two Newton steps polish it.
inline double solve_entropy_threshold(double c) {
  require(c >= 0.5 && c < 1.0, "entropy threshold needs 1/2 <= c < 1");
  const double target = std::log(c);
  auto f = [](double t) { return t * std::log(t) + (1.0 - t) * std::log1p(-t); };
  double lo = 0.5, hi = 1.0;
  if (f(lo) >= target) return 0.5;
  for (int i = 0; i < 200 && hi - lo > 1e-17; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  double t = 0.5 * (lo + hi);
  for (int i = 0; i < 2; ++i) {
    const double slope = std::log(t) - std::log1p(-t);
    if (slope <= 0.0) break;
    const double next = t - (f(t) - target) / slope;
    if (next > lo - 1e-15 && next < hi + 1e-15) t = next;
  }
  return t;
}

enum class RateForm {
  three_term,  // |A|^(1/p) (rho_0^q + rho_1^q + rho_-1^q)^(1/q) per digit
  two_term,    // majorant with rho = max_j rho_j: (rho^q + (1 - rho)^q)^(1/q)
};

struct RateBound {
  double p = 2.0;
  double q = 2.0;  // Holder conjugate of p
  unsigned r = 0;
  double per_digit_rate = 1.0;  // three-term form
  double two_term_rate = 1.0;
  double total_bound = 1.0;     // per_digit_rate^r
  double two_term_total = 1.0;  // two_term_rate^r
  // c in 2^(-c r): -log2 of the per-digit rate of the form that was optimized.
  double exponent = 0.0;
};

namespace detail {

// ln of the per-digit rate as a function of s = 1/p in (0, 1):
//   (s/2) ln 3 + (1 - s) ln sum_j rho_j^(1/(1-s)).
inline double log_rate(const std::vector<double>& probs, double s) {
  const double q = 1.0 / (1.0 - s);
  double hi = -INFINITY;
  for (double p : probs)
    if (p > 0.0) hi = std::max(hi, q * std::log(p));
  double acc = 0.0;
  for (double p : probs)
    if (p > 0.0) acc += std::exp(q * std::log(p) - hi);
  return 0.5 * s * std::log(3.0) + (1.0 - s) * (hi + std::log(acc));
}

inline std::vector<double> rate_probs(const TernaryCoeffDist& dist, RateForm form) {
  if (form == RateForm::three_term) return {dist.prob_double(-1), dist.prob_double(0), dist.prob_double(1)};
  const Rational& top = dist.max_prob();
  return {top.get_d(), Rational(1 - top).get_d()};
}

}  // namespace detail

inline RateBound rate_bound(const TernaryCoeffDist& dist, unsigned r, double p) {
  require(p > 1.0 && std::isfinite(p), "Holder exponent p must be finite and > 1");
  const double s = 1.0 / p;
  RateBound out;
  out.p = p;
  out.q = p / (p - 1.0);
  out.r = r;
  out.per_digit_rate = std::exp(detail::log_rate(detail::rate_probs(dist, RateForm::three_term), s));
  out.two_term_rate = std::exp(detail::log_rate(detail::rate_probs(dist, RateForm::two_term), s));
  out.total_bound = std::pow(out.per_digit_rate, r);
  out.two_term_total = std::pow(out.two_term_rate, r);
  out.exponent = -std::log2(out.per_digit_rate);
  return out;
}

/// Minimizes the chosen per-digit rate over p by golden-section search in
/// s = 1/p on [1e-9, 1 - 1e-9]; the log-rate is convex in s.
inline RateBound optimize_rate(const TernaryCoeffDist& dist, unsigned r, RateForm form = RateForm::three_term) {
  const std::vector<double> probs = detail::rate_probs(dist, form);
  auto g = [&](double s) { return detail::log_rate(probs, s); };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 1e-9, b = 1.0 - 1e-9;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double g1 = g(x1), g2 = g(x2);
  while (b - a > 1e-10) {
    if (g1 <= g2) {
      b = x2, x2 = x1, g2 = g1;
      x1 = b - phi * (b - a), g1 = g(x1);
    } else {
      a = x1, x1 = x2, g1 = g2;
      x2 = a + phi * (b - a), g2 = g(x2);
    }
  }
  double s = 0.5 * (a + b);
  // The minimum may sit on the bracket ends.
  for (double edge : {1e-9, 1.0 - 1e-9})
    if (g(edge) < g(s)) s = edge;
  RateBound out = rate_bound(dist, r, 1.0 / s);
  if (form == RateForm::two_term) out.exponent = -std::log2(out.two_term_rate);
  return out;
}

/// Coefficient law with P(xi = 0) = t and the rest split evenly.
inline TernaryCoeffDist dist_with_max_prob(const Rational& t, unsigned m) {
  const Rational side = (1 - t) / 2;
  return TernaryCoeffDist(side, t, side, m);
}

struct ClaimReport {
  std::uint64_t B = 0;
  unsigned r = 0;
  RateBound rate;         // optimized three-term form
  RateBound two_term;     // optimized two-term form
  Rational exact_union;   // sum_{k in [B, 2B]} P(k^2 | P(3)), exact per k
  std::uint64_t k_cutoff = 0;
  bool partial = false;
  bool union_below_bound = false;  // exact_union <= rate.total_bound
};

// Largest r with 3^r <= B^2.
inline unsigned claim_digit_count(std::uint64_t B) {
  require(B >= 2, "B must be at least 2");
  const BigInt b2 = BigInt(std::to_string(B)) * BigInt(std::to_string(B));
  unsigned r = 0;
  BigInt p = 3;
  while (p <= b2) {
    p *= 3;
    ++r;
  }
  return r;
}

inline ClaimReport claim_bound(const TernaryCoeffDist& dist, std::uint64_t B, unsigned threads = 1,
                               std::uint64_t max_modulus = std::uint64_t{1} << 22) {
  ClaimReport rep;
  rep.B = B;
  rep.r = claim_digit_count(B);
  rep.rate = optimize_rate(dist, rep.r, RateForm::three_term);
  rep.two_term = optimize_rate(dist, rep.r, RateForm::two_term);
  const BigInt vmax = max_abs_value_at_three(dist.m());
  std::vector<std::uint64_t> ks;
  for (std::uint64_t k = B; k <= 2 * B; ++k) {
    if (k * k > max_modulus && BigInt(std::to_string(k * k)) <= vmax) {
      rep.partial = true;
      break;
    }
    ks.push_back(k);
  }
  std::vector<Rational> probs(ks.size());
  parallel_for(ks.size(), threads, [&](std::size_t i) { probs[i] = square_divisibility_prob(dist, ks[i]); });
  rep.exact_union = 0;
  for (const auto& p : probs) rep.exact_union += p;
  rep.k_cutoff = ks.empty() ? 0 : ks.back();
  rep.union_below_bound = rep.exact_union.get_d() <= rep.rate.total_bound;
  return rep;
}

struct MonteCarloTraceRow {
  std::size_t shard = 0;
  std::size_t samples = 0;  // cumulative
  std::uint64_t hits = 0;   // cumulative
};

struct MonteCarloResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t hits = 0;
  std::size_t samples = 0;
  std::vector<MonteCarloTraceRow> trace;
};

namespace detail {

inline int draw_coefficient(Rng& rng, double p_minus, double p_zero) {
  const double u = rng.uniform();
  if (u < p_minus) return -1;
  if (u < p_minus + p_zero) return 0;
  return 1;
}

}  // namespace detail

/// Frequency of {exists k in [B, k_max] : k^2 | P(3)} over sampled
/// coefficient vectors, with its binomial standard error. Sampling is
/// sharded with derived seeds, so results do not depend on `threads`.
inline MonteCarloResult monte_carlo_square_divisor(const TernaryCoeffDist& dist, std::uint64_t B, std::uint64_t k_max,
                                                   std::size_t samples, std::uint64_t seed, unsigned threads = 1) {
  require(samples >= 1, "need at least one sample");
  require(B >= 1 && B <= k_max, "need 1 <= B <= k_max");
  require(k_max < (std::uint64_t{1} << 31), "k_max too large");
  const unsigned n = dist.coefficient_count();
  const double p_minus = dist.prob_double(-1), p_zero = dist.prob_double(0);
  constexpr std::size_t kShard = 1 << 16;
  const std::size_t shards = (samples + kShard - 1) / kShard;
  std::vector<std::uint64_t> hits(shards, 0);
  parallel_for(shards, threads, [&](std::size_t s) {
    Rng rng(derive_seed(seed, s));
    const std::size_t count = std::min(kShard, samples - s * kShard);
    for (std::size_t i = 0; i < count; ++i) {
      bool hit = false;
      if (n <= 79) {
        __int128 value = 0, pow3 = 1;
        for (unsigned j = 0; j < n; ++j) {
          value += detail::draw_coefficient(rng, p_minus, p_zero) * pow3;
          if (j + 1 < n) pow3 *= 3;
        }
        for (std::uint64_t k = B; k <= k_max && !hit; ++k) hit = value % static_cast<__int128>(k * k) == 0;
      } else {
        BigInt value = 0, pow3 = 1;
        for (unsigned j = 0; j < n; ++j) {
          value += detail::draw_coefficient(rng, p_minus, p_zero) * pow3;
          pow3 *= 3;
        }
        for (std::uint64_t k = B; k <= k_max && !hit; ++k)
          hit = mpz_divisible_ui_p(value.get_mpz_t(), static_cast<unsigned long>(k * k)) != 0;
      }
      if (hit) ++hits[s];
    }
  });
  MonteCarloResult out;
  out.samples = samples;
  for (std::size_t s = 0; s < shards; ++s) {
    out.hits += hits[s];
    out.trace.push_back({s, std::min(samples, (s + 1) * kShard), out.hits});
  }
  out.estimate = static_cast<double>(out.hits) / static_cast<double>(samples);
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(samples));
  return out;
}

}  // namespace coinsieve
