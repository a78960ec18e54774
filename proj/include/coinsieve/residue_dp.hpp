#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "coinsieve/errors.hpp"
#include "coinsieve/measure.hpp"
#include "coinsieve/rational.hpp"

namespace coinsieve {

/// Exact law of n mod q under a BiasedBitMeasure.
struct ResidueMassTable {
  std::uint64_t q = 1;
  std::vector<ExactProb> masses;

  const ExactProb& operator[](std::uint64_t residue) const { return masses.at(residue); }
};

/// Exact law of P(3) = sum_{j<=m} xi_j 3^j mod M.
struct TernaryResidueTable {
  std::uint64_t modulus = 1;
  std::vector<ExactProb> probs;
  TernaryCoeffDist dist;

  const ExactProb& operator[](std::uint64_t residue) const { return probs.at(residue); }
};

namespace detail {

// Scales out the common denominator so the DP runs over integers; the
// result entries are weights / scale.
struct ScaledDp {
  std::vector<BigInt> weights;
  BigInt scale;
};

inline std::vector<ExactProb> normalize(const ScaledDp& dp) {
  std::vector<ExactProb> out;
  out.reserve(dp.weights.size());
  for (const auto& w : dp.weights) out.emplace_back(Rational(w, dp.scale));
  return out;
}

inline ScaledDp binary_digit_dp(const BiasedBitMeasure& meas, std::uint64_t q) {
  const BigInt den = meas.rho().get_den();
  const BigInt w0 = meas.rho().get_num();
  const BigInt w1 = den - w0;
  std::vector<BigInt> cur(q, 0), next(q);
  cur[0] = 1;
  std::uint64_t shift = 1 % q;  // 2^j mod q
  for (unsigned j = 0; j < meas.m(); ++j) {
    for (std::uint64_t r = 0; r < q; ++r) {
      const std::uint64_t from = (r + q - shift) % q;
      next[r] = w0 * cur[r] + w1 * cur[from];
    }
    cur.swap(next);
    shift = (shift * 2) % q;
  }
  return {std::move(cur), pow_ui(den, meas.m())};
}

struct TernaryWeights {
  BigInt minus, zero, plus, den;
};

inline TernaryWeights ternary_weights(const TernaryCoeffDist& dist) {
  BigInt den = 1;
  for (int d : {-1, 0, 1}) den = lcm(den, BigInt(dist.prob(d).get_den()));
  auto scaled = [&](int d) { return BigInt(dist.prob(d).get_num() * (den / dist.prob(d).get_den())); };
  return {scaled(-1), scaled(0), scaled(1), den};
}

}  // namespace detail

inline ResidueMassTable residue_mass(const BiasedBitMeasure& meas, std::uint64_t q) {
  require(q >= 1, "modulus must be positive");
  return {q, detail::normalize(detail::binary_digit_dp(meas, q))};
}

// mu[q | n] - 1/q, exactly.
inline Rational remainder_exact(const BiasedBitMeasure& meas, std::uint64_t q) {
  require(q >= 1, "modulus must be positive");
  const auto dp = detail::binary_digit_dp(meas, q);
  Rational r(dp.weights[0], dp.scale);
  r.canonicalize();
  return r - Rational(1, q);
}

inline TernaryResidueTable ternary_residue_table(const TernaryCoeffDist& dist, std::uint64_t modulus) {
  require(modulus >= 1, "modulus must be positive");
  const auto w = detail::ternary_weights(dist);
  const std::uint64_t M = modulus;
  std::vector<BigInt> cur(M, 0), next(M);
  cur[0] = 1;
  std::uint64_t shift = 1 % M;  // 3^j mod M
  for (unsigned j = 0; j <= dist.m(); ++j) {
    for (std::uint64_t r = 0; r < M; ++r) {
      next[r] = w.zero * cur[r] + w.plus * cur[(r + M - shift) % M] + w.minus * cur[(r + shift) % M];
    }
    cur.swap(next);
    shift = (shift * 3) % M;
  }
  return {M, detail::normalize({std::move(cur), pow_ui(w.den, dist.m() + 1)}), dist};
}

// Largest |P(3)| over all coefficient vectors: (3^(m+1) - 1) / 2.
inline BigInt max_abs_value_at_three(unsigned m) { return (pow_ui(BigInt(3), m + 1) - 1) / 2; }

// P(k^2 | P(3)); P(3) = 0 counts as divisible.
inline Rational square_divisibility_prob(const TernaryCoeffDist& dist, std::uint64_t k) {
  const std::uint64_t k2 = k * k;
  if (BigInt(std::to_string(k2)) > max_abs_value_at_three(dist.m()))
    return pow_ui(dist.prob(0), dist.m() + 1);
  return ternary_residue_table(dist, k2)[0].value();
}

// Exact P(exists k in [lo, hi] : k^2 | P(3)) by enumerating all 3^(m+1)
// coefficient vectors. Balanced ternary makes vector <-> value a bijection,
// so the loop runs over values directly.
inline ExactProb square_divisor_event_enumerated(const TernaryCoeffDist& dist, std::uint64_t lo, std::uint64_t hi) {
  const unsigned n = dist.coefficient_count();
  require(n <= 15, "exhaustive enumeration limited to 15 coefficients");
  std::vector<std::int64_t> squares;
  for (std::uint64_t k = lo; k <= hi; ++k) squares.push_back(static_cast<std::int64_t>(k * k));
  // counts[minus][zero]
  std::vector<std::vector<std::uint64_t>> counts(n + 1, std::vector<std::uint64_t>(n + 1, 0));
  std::vector<int> digits(n, -1);
  std::int64_t value = 0, pow3 = 1;
  std::vector<std::int64_t> pows(n);
  for (unsigned j = 0; j < n; ++j) {
    pows[j] = pow3;
    value -= pow3;
    pow3 *= 3;
  }
  unsigned minus = n, zero = 0;
  for (;;) {
    bool hit = false;
    for (std::int64_t s : squares)
      if (value % s == 0) {
        hit = true;
        break;
      }
    if (hit) ++counts[minus][zero];
    unsigned j = 0;
    for (; j < n; ++j) {
      if (digits[j] < 1) {
        if (digits[j] == -1) --minus, ++zero;
        else --zero;
        ++digits[j];
        value += pows[j];
        break;
      }
      digits[j] = -1;
      value -= 2 * pows[j];
      ++minus;
    }
    if (j == n) break;
  }
  const auto w = detail::ternary_weights(dist);
  BigInt total = 0;
  for (unsigned a = 0; a <= n; ++a)
    for (unsigned b = 0; a + b <= n; ++b)
      if (counts[a][b])
        total += BigInt(std::to_string(counts[a][b])) * pow_ui(w.minus, a) * pow_ui(w.zero, b) * pow_ui(w.plus, n - a - b);
  return ExactProb(Rational(total, pow_ui(w.den, n)));
}

/// Exact P(exists k in [lo, hi] : k^2 | P(3)) by inclusion-exclusion over
/// the lcm of each subset of squares, using one residue DP per distinct lcm.
inline ExactProb square_divisor_event_inclusion_exclusion(const TernaryCoeffDist& dist, std::uint64_t lo,
                                                          std::uint64_t hi, std::uint64_t max_modulus = 1u << 22) {
  require(lo >= 1 && lo <= hi, "need 1 <= lo <= hi");
  require(hi - lo < 20, "inclusion-exclusion limited to 20 moduli");
  const BigInt vmax = max_abs_value_at_three(dist.m());
  const Rational p_zero = pow_ui(dist.prob(0), dist.m() + 1);
  std::map<BigInt, Rational> cache;
  auto divisible_prob = [&](const BigInt& L) -> Rational {
    if (L > vmax) return p_zero;
    auto it = cache.find(L);
    if (it != cache.end()) return it->second;
    if (L > max_modulus) throw BudgetExceeded("lcm modulus " + L.get_str() + " exceeds DP budget");
    Rational p = ternary_residue_table(dist, L.get_ui())[0].value();
    cache.emplace(L, p);
    return p;
  };
  const unsigned count = static_cast<unsigned>(hi - lo + 1);
  Rational total = 0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << count); ++mask) {
    BigInt L = 1;
    for (unsigned i = 0; i < count; ++i)
      if (mask >> i & 1) {
        const BigInt k = BigInt(std::to_string(lo + i));
        L = lcm(L, BigInt(k * k));
      }
    const Rational p = divisible_prob(L);
    if (std::popcount(mask) % 2) total += p;
    else total -= p;
  }
  return ExactProb(total);
}

struct SquareDivisorUnion {
  Rational union_bound;              // sum_k P(k^2 | P(3)), may exceed 1
  std::optional<ExactProb> exact;    // exact event probability when enumerable
  std::uint64_t k_cutoff = 0;        // largest k included in union_bound
  bool partial = false;
};

/// Union bound sum_{k=B}^{k_max} P(k^2 | P(3)) from per-k residue tables,
/// plus the exact event probability when 3^(m+1) <= 3^15. Moduli whose DP
/// would exceed `max_modulus` states stop the sum and mark it partial.
inline SquareDivisorUnion square_divisor_union(const TernaryCoeffDist& dist, std::uint64_t B, std::uint64_t k_max,
                                               std::uint64_t max_modulus = std::uint64_t{1} << 22) {
  require(B >= 2 && B <= k_max, "need 2 <= B <= k_max");
  SquareDivisorUnion out;
  out.union_bound = 0;
  const BigInt vmax = max_abs_value_at_three(dist.m());
  for (std::uint64_t k = B; k <= k_max; ++k) {
    const std::uint64_t k2 = k * k;
    if (k2 > max_modulus && BigInt(std::to_string(k2)) <= vmax) {
      out.partial = true;
      break;
    }
    out.union_bound += square_divisibility_prob(dist, k);
    out.k_cutoff = k;
  }
  if (dist.coefficient_count() <= 15) out.exact = square_divisor_event_enumerated(dist, B, k_max);
  return out;
}

}  // namespace coinsieve
