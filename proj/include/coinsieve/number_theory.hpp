#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "coinsieve/errors.hpp"

namespace coinsieve {

// Least d >= 1 with 2^d = 1 (mod q); q odd. ord_1(2) = 1.
inline std::uint64_t multiplicative_order_of_two(std::uint64_t q) {
  require(q >= 1 && q % 2 == 1, "order of 2 needs an odd modulus");
  if (q == 1) return 1;
  std::uint64_t x = 2 % q, d = 1;
  while (x != 1) {
    x = (x * 2) % q;
    ++d;
  }
  return d;
}

inline std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
  unsigned __int128 result = 1 % mod, b = base % mod;
  while (exp) {
    if (exp & 1) result = result * b % mod;
    b = b * b % mod;
    exp >>= 1;
  }
  return static_cast<std::uint64_t>(result);
}

inline bool is_squarefree_trial(std::uint64_t n) {
  if (n == 0) return false;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    n /= p;
    if (n % p == 0) return false;
  }
  return true;
}

/// Smallest-prime-factor table on [0, limit]; spf[0] = spf[1] = 0.
class SpfSieve {
 public:
  explicit SpfSieve(std::uint32_t limit) : spf_(static_cast<std::size_t>(limit) + 1, 0) {
    for (std::uint32_t i = 2; i <= limit; ++i) {
      if (spf_[i] == 0) {
        primes_.push_back(i);
        spf_[i] = i;
      }
      for (std::uint32_t p : primes_) {
        const std::uint64_t composite = std::uint64_t{p} * i;
        if (p > spf_[i] || composite > limit) break;
        spf_[composite] = p;
      }
    }
  }

  std::uint32_t limit() const { return static_cast<std::uint32_t>(spf_.size() - 1); }
  std::uint32_t smallest_prime_factor(std::uint32_t n) const { return spf_.at(n); }
  const std::vector<std::uint32_t>& primes() const { return primes_; }
  bool is_prime(std::uint32_t n) const { return n >= 2 && spf_.at(n) == n; }

  bool is_squarefree(std::uint32_t n) const {
    if (n == 0) return false;
    while (n > 1) {
      const std::uint32_t p = spf_.at(n);
      n /= p;
      if (n % p == 0) return false;
    }
    return true;
  }

  // Number of prime factors with multiplicity.
  unsigned big_omega(std::uint32_t n) const {
    unsigned count = 0;
    while (n > 1) {
      n /= spf_.at(n);
      ++count;
    }
    return count;
  }

 private:
  std::vector<std::uint32_t> spf_;
  std::vector<std::uint32_t> primes_;
};

inline std::vector<std::uint32_t> primes_up_to(std::uint32_t limit) {
  std::vector<std::uint32_t> primes;
  if (limit < 2) return primes;
  std::vector<bool> composite(static_cast<std::size_t>(limit) + 1, false);
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return primes;
}

/// Omega(n) (prime factors with multiplicity) for all n < limit, one byte
/// each; entries 0 and 1 are 0. Memory is `limit` bytes plus a bitset.
inline std::vector<std::uint8_t> big_omega_table(std::uint64_t limit) {
  require(limit <= (std::uint64_t{1} << 32), "omega table limited to 2^32 entries");
  std::vector<std::uint8_t> omega(limit, 0);
  if (limit < 3) return omega;
  for (std::uint32_t p : primes_up_to(static_cast<std::uint32_t>(limit - 1))) {
    for (std::uint64_t pk = p; pk < limit; pk *= p) {
      for (std::uint64_t n = pk; n < limit; n += pk) ++omega[n];
      if (pk > (limit - 1) / p) break;
    }
  }
  return omega;
}

/// Calls visit(q) for every odd squarefree q in [lo, hi], ascending. Uses a
/// segmented sieve over p^2 so memory stays O(sqrt(hi) + segment).
/// visit may return false to stop early; the function then returns false.
template <class Visit>
bool for_each_odd_squarefree(std::uint64_t lo, std::uint64_t hi, Visit&& visit) {
  if (lo < 1) lo = 1;
  if (hi < lo) return true;
  const auto root = static_cast<std::uint32_t>(std::sqrt(static_cast<double>(hi))) + 1;
  const std::vector<std::uint32_t> primes = primes_up_to(root);
  constexpr std::uint64_t kSegment = std::uint64_t{1} << 20;
  std::vector<bool> bad(kSegment);
  for (std::uint64_t start = lo; start <= hi; start += kSegment) {
    const std::uint64_t end = std::min(hi, start + kSegment - 1);
    std::fill(bad.begin(), bad.end(), false);
    for (std::uint32_t p : primes) {
      if (p == 2) continue;
      const std::uint64_t sq = std::uint64_t{p} * p;
      if (sq > end) break;
      for (std::uint64_t n = (start + sq - 1) / sq * sq; n <= end; n += sq) bad[n - start] = true;
    }
    for (std::uint64_t q = start | 1; q <= end; q += 2)
      if (!bad[q - start] && !visit(q)) return false;
  }
  return true;
}

inline std::vector<std::uint64_t> odd_squarefree_up_to(std::uint64_t hi, std::uint64_t lo = 3) {
  std::vector<std::uint64_t> out;
  for_each_odd_squarefree(lo, hi, [&](std::uint64_t q) {
    out.push_back(q);
    return true;
  });
  return out;
}

namespace detail {

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline bool miller_rabin_witness(std::uint64_t n, std::uint64_t a, std::uint64_t d, unsigned s) {
  std::uint64_t x = pow_mod(a % n, d, n);
  if (x == 1 || x == n - 1) return false;
  for (unsigned r = 1; r < s; ++r) {
    x = mul_mod(x, x, n);
    if (x == n - 1) return false;
  }
  return true;
}

inline std::uint64_t pollard_brent(std::uint64_t n, std::uint64_t c) {
  auto f = [&](std::uint64_t x) { return (mul_mod(x, x, n) + c) % n; };
  std::uint64_t y = 2, g = 1, q = 1, x = 0, ys = 0;
  std::uint64_t r = 1;
  constexpr std::uint64_t kBatch = 128;
  while (g == 1) {
    x = y;
    for (std::uint64_t i = 0; i < r; ++i) y = f(y);
    for (std::uint64_t k = 0; k < r && g == 1; k += kBatch) {
      ys = y;
      for (std::uint64_t i = 0; i < std::min(kBatch, r - k); ++i) {
        y = f(y);
        q = mul_mod(q, x > y ? x - y : y - x, n);
      }
      g = std::gcd(q, n);
    }
    r *= 2;
  }
  if (g == n) {
    do {
      ys = f(ys);
      g = std::gcd(x > ys ? x - ys : ys - x, n);
    } while (g == 1);
  }
  return g;
}

}  // namespace detail

// Deterministic for all 64-bit n (fixed witness set).
inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  unsigned s = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++s;
  }
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37})
    if (detail::miller_rabin_witness(n, a, d, s)) return false;
  return true;
}

/// Omega(n) for any 64-bit n >= 1, by trial division then Pollard-Brent.
inline unsigned big_omega_u64(std::uint64_t n) {
  if (n <= 1) return 0;
  unsigned count = 0;
  for (std::uint64_t p = 2; p < 64 && p * p <= n; ++p) {
    while (n % p == 0) {
      n /= p;
      ++count;
    }
  }
  std::vector<std::uint64_t> stack{n};
  while (!stack.empty()) {
    std::uint64_t x = stack.back();
    stack.pop_back();
    if (x == 1) continue;
    if (is_prime_u64(x)) {
      ++count;
      continue;
    }
    std::uint64_t factor = x;
    for (std::uint64_t c = 1; factor == x; ++c) factor = detail::pollard_brent(x, c);
    stack.push_back(factor);
    stack.push_back(x / factor);
  }
  return count;
}

}  // namespace coinsieve
