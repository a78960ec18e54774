#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "coinsieve/errors.hpp"
#include "coinsieve/expsum.hpp"
#include "coinsieve/measure.hpp"
#include "coinsieve/number_theory.hpp"
#include "coinsieve/parallel.hpp"
#include "coinsieve/residue_dp.hpp"
#include "coinsieve/rng.hpp"

namespace coinsieve {

struct SweepRecord {
  std::uint64_t q = 0;
  std::uint64_t ord2 = 0;
  bool squarefree = true;
  double abs_rq = 0.0;
  double error_bound = 0.0;
  double log_abs_rq = -INFINITY;
  double lambda_abs_mean = 0.0;
  double cumulative = 0.0;
};

/// Sum' |R_q| over odd squarefree q in [q_min, q_max].
struct SweepReport {
  Rational rho;
  unsigned m = 0;
  unsigned precision_bits = 0;
  std::uint64_t q_min = 3, q_max = 3;
  std::vector<SweepRecord> records;
  double cumulative_sum = 0.0;
  bool partial = false;
  std::uint64_t q_cutoff = 0;  // largest q actually included
};

struct SweepOptions {
  unsigned precision_bits = 128;
  unsigned threads = 1;
  std::uint64_t q_min = 3;
  // Upper bound on sum of q over included moduli (each R_q costs O(q)).
  // 0 means unlimited. Exceeding it truncates the sweep to a prefix.
  std::uint64_t work_budget = 0;
};

inline SweepReport sweep_remainders(const BiasedBitMeasure& meas, std::uint64_t q_max, const SweepOptions& opts = {}) {
  require(q_max >= 3, "q_max must be at least 3");
  SweepReport report;
  report.rho = meas.rho();
  report.m = meas.m();
  report.precision_bits = opts.precision_bits;
  report.q_min = std::max<std::uint64_t>(opts.q_min, 3);
  report.q_max = q_max;
  std::vector<std::uint64_t> moduli = odd_squarefree_up_to(q_max, report.q_min);
  if (opts.work_budget) {
    std::uint64_t work = 0;
    std::size_t keep = 0;
    while (keep < moduli.size() && work + moduli[keep] <= opts.work_budget) work += moduli[keep++];
    if (keep < moduli.size()) {
      report.partial = true;
      moduli.resize(keep);
    }
  }
  report.records.resize(moduli.size());
  // Largest moduli first so the slowest tasks start early; slots are fixed.
  parallel_for(moduli.size(), opts.threads, [&](std::size_t i) {
    const std::size_t idx = moduli.size() - 1 - i;
    const std::uint64_t q = moduli[idx];
    const RemainderEstimate est = remainder_term(q, meas, opts.precision_bits);
    auto& rec = report.records[idx];
    rec.q = q;
    rec.ord2 = multiplicative_order_of_two(q);
    rec.abs_rq = est.abs_value;
    rec.error_bound = est.error_bound;
    rec.log_abs_rq = est.log_abs_value;
    rec.lambda_abs_mean = est.lambda_abs_mean;
  });
  double running = 0.0;
  for (auto& rec : report.records) {
    running += rec.abs_rq;
    rec.cumulative = running;
  }
  report.cumulative_sum = running;
  report.q_cutoff = report.records.empty() ? 0 : report.records.back().q;
  return report;
}

// |R_q| for rho = 1/2: mu[q | n] = ceil(2^m / q) / 2^m exactly.
inline double uniform_remainder_abs(unsigned m, std::uint64_t q) {
  require(m <= 62, "closed form limited to m <= 62");
  const std::uint64_t N = std::uint64_t{1} << m;
  const std::uint64_t count = (N - 1) / q + 1;
  // count/N - 1/q = (count q - N) / (N q); numerator is exact in 128 bits.
  const auto num = static_cast<__int128>(count) * q - static_cast<__int128>(N);
  return std::fabs(static_cast<double>(num)) / (static_cast<double>(N) * static_cast<double>(q));
}

// |R_q| by summing mu over the multiples of q below 2^m; O(2^m / q).
inline double remainder_by_multiples(const BiasedBitMeasure& meas, std::uint64_t q) {
  const unsigned m = meas.m();
  require(m <= 62, "multiple enumeration limited to m <= 62");
  std::vector<double> by_popcount(m + 1);
  for (unsigned k = 0; k <= m; ++k) by_popcount[k] = point_mass_float(meas, (std::uint64_t{1} << k) - 1);
  const std::uint64_t N = std::uint64_t{1} << m;
  detail::CompensatedSum<double> sum(0.0);
  for (std::uint64_t n = 0; n < N; n += q) sum.add(by_popcount[static_cast<unsigned>(std::popcount(n))]);
  return std::fabs(sum.total() - 1.0 / static_cast<double>(q));
}

struct ExponentRow {
  unsigned m = 0;
  double alpha_hat = 0.0;
  std::uint64_t q_first_exceeding = 0;  // 0 if the threshold was never crossed
  std::uint64_t q_scanned = 0;          // largest q examined
  double cumulative = 0.0;              // Sum' |R_q| over q < 2^(alpha_hat m)
  bool partial = false;                 // budget hit before crossing; alpha_hat is a lower bound
};

struct ExponentOptions {
  unsigned threads = 1;
  std::uint64_t q_budget = std::uint64_t{1} << 30;       // largest modulus examined
  std::uint64_t work_budget = std::uint64_t{1} << 31;    // residue evaluations (non-uniform rho)
  std::uint64_t block = 256;
};

/// For each m, the largest alpha in (0, 1] with Sum'_{q < 2^(alpha m)} |R_q| <= epsilon.
/// The partial sums are a step function of the cutoff, so an ascending scan
/// finds the first q* where the running sum exceeds epsilon and alpha = log2(q*)/m.
inline std::vector<ExponentRow> estimate_sieving_exponent(const Rational& rho, const std::vector<unsigned>& m_list,
                                                          double epsilon, const ExponentOptions& opts = {},
                                                          Arithmetic arithmetic = Arithmetic::exact) {
  require(epsilon > 0.0 && epsilon < 1.0 + 1e-12, "epsilon must lie in (0, 1]");
  for (std::size_t i = 1; i < m_list.size(); ++i) require(m_list[i] > m_list[i - 1], "m_list must be increasing");
  std::vector<ExponentRow> rows;
  for (unsigned m : m_list) {
    require(m >= 2, "m must be at least 2");
    const BiasedBitMeasure meas(m, rho, arithmetic);
    ExponentRow row;
    row.m = m;
    const double mf = m;
    const std::uint64_t limit =
        std::min<std::uint64_t>(opts.q_budget, m >= 63 ? UINT64_MAX : (std::uint64_t{1} << m) - 1);
    double running = 0.0;
    bool crossed = false, out_of_work = false;
    if (meas.is_uniform() && m <= 62) {
      for_each_odd_squarefree(3, limit, [&](std::uint64_t q) {
        row.q_scanned = q;
        const double next = running + uniform_remainder_abs(m, q);
        if (next > epsilon) {
          crossed = true;
          row.q_first_exceeding = q;
          return false;
        }
        running = next;
        return true;
      });
    } else {
      // Enumerating multiples is cheaper than the orbit product once q > 2^(m/2).
      const double switch_q = m <= 40 ? std::ldexp(1.0, static_cast<int>(m / 2)) : INFINITY;
      std::uint64_t work = 0;
      std::vector<std::uint64_t> block;
      std::uint64_t next_lo = 3;
      while (!crossed && next_lo <= limit && work < opts.work_budget) {
        block.clear();
        const std::uint64_t hi = std::min(limit, next_lo + 8 * opts.block);
        for_each_odd_squarefree(next_lo, hi, [&](std::uint64_t q) {
          block.push_back(q);
          return block.size() < opts.block;
        });
        next_lo = block.empty() ? hi + 1 : block.back() + 1;
        if (block.empty()) continue;
        std::vector<double> values(block.size());
        parallel_for(block.size(), opts.threads, [&](std::size_t i) {
          const std::uint64_t q = block[i];
          values[i] = static_cast<double>(q) <= switch_q ? remainder_term(q, meas, 53).abs_value
                                                         : remainder_by_multiples(meas, q);
        });
        for (std::size_t i = 0; i < block.size(); ++i) {
          const std::uint64_t q = block[i];
          work += static_cast<double>(q) <= switch_q ? q : (std::uint64_t{1} << m) / q + 1;
          row.q_scanned = q;
          if (running + values[i] > epsilon) {
            crossed = true;
            row.q_first_exceeding = q;
            break;
          }
          running += values[i];
          if (work >= opts.work_budget) break;
        }
      }
      out_of_work = !crossed && next_lo <= limit;
    }
    row.cumulative = running;
    if (crossed) {
      row.alpha_hat = std::min(1.0, std::log2(static_cast<double>(row.q_first_exceeding)) / mf);
    } else if (m < 63 && limit == (std::uint64_t{1} << m) - 1 && !out_of_work) {
      row.alpha_hat = 1.0;  // every q < 2^m examined
    } else {
      row.partial = true;
      row.alpha_hat = std::min(1.0, std::log2(static_cast<double>(row.q_scanned + 1)) / mf);
    }
    rows.push_back(row);
  }
  return rows;
}

struct PseudoprimeMass {
  unsigned r = 0;
  double mass = 0.0;
  std::optional<Rational> exact;
  double std_error = 0.0;
  bool sampled = false;
  std::size_t samples = 0;
};

struct PseudoprimeOptions {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  unsigned exact_max_m = 26;
};

/// mu{n in [2, 2^m) : Omega(n) <= r} for each r in r_list. Exact (rational
/// when rho is) for m <= 26 via an Omega sieve over the whole support,
/// otherwise a seeded Monte Carlo estimate with binomial standard error.
inline std::vector<PseudoprimeMass> pseudoprime_mass(const BiasedBitMeasure& meas, const std::vector<unsigned>& r_list,
                                                     const PseudoprimeOptions& opts = {}) {
  for (unsigned r : r_list) require(r >= 1, "r must be at least 1");
  const unsigned m = meas.m();
  std::vector<PseudoprimeMass> out;
  if (m <= opts.exact_max_m) {
    require(m >= 1, "m must be at least 1");
    const std::uint64_t N = std::uint64_t{1} << m;
    const std::vector<std::uint8_t> omega = big_omega_table(N);
    // counts[omega][popcount]
    std::vector<std::vector<std::uint64_t>> counts(m + 1, std::vector<std::uint64_t>(m + 1, 0));
    for (std::uint64_t n = 2; n < N; ++n) ++counts[omega[n]][static_cast<unsigned>(std::popcount(n))];
    const Rational& rho = meas.rho();
    std::vector<Rational> atom(m + 1);
    for (unsigned k = 0; k <= m; ++k) atom[k] = pow_ui(rho, m - k) * pow_ui(Rational(1 - rho), k);
    for (unsigned r : r_list) {
      Rational total = 0;
      for (unsigned w = 1; w <= std::min(r, m); ++w)
        for (unsigned k = 0; k <= m; ++k)
          if (counts[w][k]) total += Rational(BigInt(std::to_string(counts[w][k]))) * atom[k];
      total.canonicalize();
      PseudoprimeMass row;
      row.r = r;
      row.mass = total.get_d();
      row.exact = total;
      out.push_back(std::move(row));
    }
    return out;
  }
  require(m <= 64, "sampling path limited to m <= 64");
  require(opts.samples >= 1, "need at least one sample");
  constexpr std::size_t kShard = 1 << 16;
  const std::size_t shards = (opts.samples + kShard - 1) / kShard;
  // hits[shard][index into r_list]
  std::vector<std::vector<std::uint64_t>> hits(shards, std::vector<std::uint64_t>(r_list.size(), 0));
  parallel_for(shards, opts.threads, [&](std::size_t s) {
    const std::size_t count = std::min(kShard, opts.samples - s * kShard);
    for (std::uint64_t n : sample(meas, derive_seed(opts.seed, s), count)) {
      if (n < 2) continue;
      const unsigned w = big_omega_u64(n);
      for (std::size_t i = 0; i < r_list.size(); ++i)
        if (w <= r_list[i]) ++hits[s][i];
    }
  });
  for (std::size_t i = 0; i < r_list.size(); ++i) {
    std::uint64_t total = 0;
    for (const auto& h : hits) total += h[i];
    PseudoprimeMass row;
    row.r = r_list[i];
    row.sampled = true;
    row.samples = opts.samples;
    row.mass = static_cast<double>(total) / static_cast<double>(opts.samples);
    row.std_error = std::sqrt(row.mass * (1.0 - row.mass) / static_cast<double>(opts.samples));
    out.push_back(std::move(row));
  }
  return out;
}

struct LegendreSieveResult {
  unsigned z = 2;
  std::vector<std::uint64_t> primes;  // odd primes p <= z
  double main_term = 1.0;             // sum_d mobius(d) / d
  double corrected = 1.0;             // sum_d mobius(d) (1/d + R_d)
  double error_budget = 0.0;          // sum_d |R_d|
  std::optional<Rational> exact;      // mu{n : gcd(n, prod p) = 1} from the residue DP
};

/// Inclusion-exclusion over squarefree d composed of odd primes p <= z:
/// mu{n coprime to all such p} = sum_d mobius(d) (1/d + R_d). The main term
/// drops the R_d; their absolute sum is the error budget.
inline LegendreSieveResult legendre_sieve_demo(const BiasedBitMeasure& meas, unsigned z, unsigned precision_bits = 128,
                                               bool with_exact = false, std::uint64_t max_modulus = 1'000'000) {
  require(z >= 2 && z <= 50, "z must lie in [2, 50]");
  LegendreSieveResult out;
  out.z = z;
  std::uint64_t product = 1;
  for (std::uint32_t p : primes_up_to(z)) {
    if (p == 2) continue;
    out.primes.push_back(p);
    product *= p;
    require(product <= max_modulus, "product of odd primes <= z exceeds the modulus range " +
                                         std::to_string(max_modulus));
  }
  const std::size_t k = out.primes.size();
  out.main_term = 0.0;
  out.corrected = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    std::uint64_t d = 1;
    for (std::size_t i = 0; i < k; ++i)
      if (mask >> i & 1) d *= out.primes[i];
    const double sign = std::popcount(mask) % 2 ? -1.0 : 1.0;
    const double rd = d == 1 ? 0.0 : remainder_term(d, meas, precision_bits).value;
    out.main_term += sign / static_cast<double>(d);
    out.corrected += sign * (1.0 / static_cast<double>(d) + rd);
    out.error_budget += std::fabs(rd);
  }
  if (with_exact) {
    const ResidueMassTable table = residue_mass(meas, product);
    Rational total = 0;
    for (std::uint64_t a = 0; a < product; ++a)
      if (std::gcd(a, product) == 1) total += table[a].value();
    out.exact = total;
  }
  return out;
}

}  // namespace coinsieve
