#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "coinsieve/errors.hpp"
#include "coinsieve/expsum.hpp"
#include "coinsieve/measure.hpp"
#include "coinsieve/number_theory.hpp"
#include "coinsieve/parallel.hpp"
#include "coinsieve/rng.hpp"

namespace coinsieve {

namespace detail {

// sin(pi theta) for any real theta, reduced to [0, 1/2] first.
inline double sin_pi_abs(double theta) {
  double t = theta - std::floor(theta);
  if (t > 0.5) t = 1.0 - t;
  return std::sin(std::numbers::pi * t);
}

// x - sin x without cancellation for small x.
inline double x_minus_sin(double x) {
  if (std::fabs(x) > 0.5) return x - std::sin(x);
  const double x2 = x * x;
  double term = x * x2 / 6.0, sum = 0.0;
  for (int k = 1; k < 12; ++k) {
    sum += term;
    term *= -x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
  }
  return sum;
}

}  // namespace detail

// Smallest exponent admitted by the power-sine bound: log(1/delta) / (rho (1 - rho)).
inline double power_sine_threshold(double delta, double rho) { return std::log(1.0 / delta) / (rho * (1.0 - rho)); }

struct InequalityCheck {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs, evaluated stably
};

/// |rho + (1-rho) e(theta)|^(2 ell) <= 1 - (1 - delta) sin^2(pi theta), evaluated
/// through |f|^2 = 1 - 4 rho (1 - rho) sin^2(pi theta). No regime check.
inline InequalityCheck power_sine_probe(double theta, double delta, double rho, double ell) {
  const double s = detail::sin_pi_abs(theta);
  const double s2 = s * s;
  const double gamma = 4.0 * rho * (1.0 - rho) * s2;
  const double log_lhs = ell * std::log1p(-gamma);
  InequalityCheck out;
  out.lhs = std::exp(log_lhs);
  out.rhs = 1.0 - (1.0 - delta) * s2;
  out.margin = -std::expm1(log_lhs) - (1.0 - delta) * s2;
  out.holds = out.margin >= 0.0;
  return out;
}

inline InequalityCheck power_sine_check(double theta, double delta, double rho, double ell) {
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(rho >= 0.5 && rho < 1.0, "rho must satisfy 1/2 <= rho < 1");
  require(ell > power_sine_threshold(delta, rho), "ell must exceed log(1/delta) / (rho (1 - rho))");
  return power_sine_probe(theta, delta, rho, ell);
}

/// 1 - (1 - delta) sin^2(theta) <= 1 + gamma - (1 - delta) sin^2(theta + gamma),
/// theta in radians. The margin uses sin^2 A - sin^2 B = sin(A+B) sin(A-B):
///   rhs - lhs = delta gamma + (1-delta) [(gamma - sin gamma) + sin gamma (1 - sin(2 theta + gamma))],
/// a sum of nonnegative terms for 0 < gamma < pi.
inline InequalityCheck shifted_sine_probe(double theta, double gamma, double delta) {
  InequalityCheck out;
  const double sa = std::sin(theta), sb = std::sin(theta + gamma);
  out.lhs = 1.0 - (1.0 - delta) * sa * sa;
  out.rhs = 1.0 + gamma - (1.0 - delta) * sb * sb;
  const double half = std::numbers::pi / 4.0 - (2.0 * theta + gamma) / 2.0;
  const double one_minus_sin = 2.0 * std::sin(half) * std::sin(half);
  out.margin = delta * gamma + (1.0 - delta) * (detail::x_minus_sin(gamma) + std::sin(gamma) * one_minus_sin);
  out.holds = out.margin >= 0.0;
  return out;
}

inline InequalityCheck shifted_sine_check(double theta, double gamma, double delta) {
  require(gamma > 0.0 && gamma < 0.1, "gamma must lie in (0, 1/10)");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  return shifted_sine_probe(theta, gamma, delta);
}

struct InequalitySuiteReport {
  std::size_t samples = 0;
  std::size_t power_sine_violations = 0;
  double power_sine_min_margin = INFINITY;
  std::size_t shifted_sine_violations = 0;
  double shifted_sine_min_margin_ratio = INFINITY;  // min over samples of margin / (delta gamma)
};

/// Random in-regime tuples for both inequalities. The power-sine draws theta in
/// [0, 1), delta in (0, 1), rho in [1/2, 1) and ell up to five times its
/// threshold; the shifted-sine draws theta in [0, 2 pi), gamma in (0, 1/10), delta in (0, 1).
inline InequalitySuiteReport inequality_property_suite(std::size_t samples, std::uint64_t seed, unsigned threads = 1) {
  constexpr std::size_t kShard = 1 << 16;
  const std::size_t shards = (samples + kShard - 1) / kShard;
  std::vector<InequalitySuiteReport> parts(shards);
  auto open_unit = [](Rng& rng) {
    double u;
    do u = rng.uniform();
    while (u == 0.0);
    return u;
  };
  parallel_for(shards, threads, [&](std::size_t s) {
    Rng rng(derive_seed(seed, s));
    auto& part = parts[s];
    part.samples = std::min(kShard, samples - s * kShard);
    for (std::size_t i = 0; i < part.samples; ++i) {
      const double theta = rng.uniform();
      const double delta = open_unit(rng);
      const double rho = 0.5 + 0.5 * rng.uniform();
      const double ell = power_sine_threshold(delta, rho) * (1.0 + 4.0 * open_unit(rng));
      const auto c3 = power_sine_check(theta, delta, rho, ell);
      if (!c3.holds) ++part.power_sine_violations;
      part.power_sine_min_margin = std::min(part.power_sine_min_margin, c3.margin);

      const double phi = 2.0 * std::numbers::pi * rng.uniform();
      const double gamma = 0.1 * open_unit(rng) * (1.0 - 1e-12);
      const double d4 = open_unit(rng);
      const auto c4 = shifted_sine_check(phi, gamma, d4);
      if (!c4.holds) ++part.shifted_sine_violations;
      part.shifted_sine_min_margin_ratio = std::min(part.shifted_sine_min_margin_ratio, c4.margin / (d4 * gamma));
    }
  });
  InequalitySuiteReport out;
  for (const auto& part : parts) {
    out.samples += part.samples;
    out.power_sine_violations += part.power_sine_violations;
    out.power_sine_min_margin = std::min(out.power_sine_min_margin, part.power_sine_min_margin);
    out.shifted_sine_violations += part.shifted_sine_violations;
    out.shifted_sine_min_margin_ratio = std::min(out.shifted_sine_min_margin_ratio, part.shifted_sine_min_margin_ratio);
  }
  return out;
}

struct ProductIntegral {
  double numeric = 0.0;
  double closed_form = 0.0;
};

/// int_0^1 prod_{j<h} (1 + delta - (1 - delta) sin^2(pi 2^j x)) dx against
/// ((1 + 3 delta) / 2)^h. The integrand is a trigonometric polynomial of
/// degree 2^h - 1, so the N-point periodic rectangle rule is exact once
/// N >= 2^h; the sum is compensated.
inline ProductIntegral product_integral_identity(unsigned h, double delta, std::uint64_t points) {
  require(h >= 1 && h <= 20, "h must lie in [1, 20]");
  require(points >= 2 && (points & (points - 1)) == 0, "quadrature points must be a power of two");
  require(points >= (std::uint64_t{1} << (h + 4)), "need at least 2^(h+4) quadrature points");
  const std::uint64_t mask = points - 1;
  const bool tabulate = points <= (std::uint64_t{1} << 22);
  std::vector<double> sin2;
  auto s2 = [&](std::uint64_t idx) {
    if (tabulate) return sin2[idx];
    const double s = std::sin(std::numbers::pi * static_cast<double>(idx) / static_cast<double>(points));
    return s * s;
  };
  if (tabulate) {
    sin2.resize(points);
    for (std::uint64_t i = 0; i < points; ++i) {
      const double s = std::sin(std::numbers::pi * static_cast<double>(i) / static_cast<double>(points));
      sin2[i] = s * s;
    }
  }
  detail::CompensatedSum<double> sum(0.0);
  for (std::uint64_t k = 0; k < points; ++k) {
    double prod = 1.0;
    for (unsigned j = 0; j < h; ++j) prod *= 1.0 + delta - (1.0 - delta) * s2((k << j) & mask);
    sum.add(prod);
  }
  return {sum.total() / static_cast<double>(points), std::pow((1.0 + 3.0 * delta) / 2.0, h)};
}

/// Parameters of the Holder-chain bound for a dyadic range q ~ Q.
struct BoundParams {
  double delta = 0.05;
  double gamma = 0.0;     // largest shift pi 2^(h-1) beta used with the shifted-sine bound
  double ell = 0.0;       // power-sine exponent, t / 4
  unsigned t_holder = 2;  // even Holder exponent
  unsigned h = 1;         // block length, 2^h within a factor 2 of Q^2
  double beta = 0.0;      // (delta / 4) Q^-2
};

// Smallest even t > 4 log(1/delta) / (rho (1 - rho)).
inline unsigned holder_exponent_threshold(double delta, double rho) {
  const double bound = 4.0 * std::log(1.0 / delta) / (rho * (1.0 - rho));
  auto t = static_cast<unsigned>(std::floor(bound)) + 1;
  if (t % 2) ++t;
  return t;
}

inline BoundParams make_bound_params(double rho, double delta, std::uint64_t Q) {
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(Q >= 2, "Q must be at least 2");
  BoundParams p;
  p.delta = delta;
  p.t_holder = holder_exponent_threshold(delta, rho);
  p.ell = p.t_holder / 4.0;
  const double log2q = std::log2(static_cast<double>(Q));
  p.h = static_cast<unsigned>(std::lround(2.0 * log2q));
  p.beta = delta / 4.0 / (static_cast<double>(Q) * static_cast<double>(Q));
  p.gamma = std::numbers::pi * std::ldexp(1.0, static_cast<int>(p.h) - 1) * p.beta;
  return p;
}

struct HolderChainReport {
  Rational rho;
  std::uint64_t Q = 0;
  unsigned m = 0;  // t h / 2
  BoundParams params;
  std::vector<std::uint64_t> moduli;  // odd squarefree q in [Q, 2Q)

  double true_sum = 0.0;        // Sum' |R_q|
  double triangle_sum = 0.0;    // Sum' (1/Q) Sum_lambda prod_{j<m} |f|
  double holder_sum = 0.0;      // Sum' [prod_tau (1/Q) Sum_lambda prod_{j in block tau} |f|^(t/2)]^(2/t)
  double block_sum = 0.0;       // Sum' (1/Q) Sum_lambda prod_{j<h} |f|^(t/2)
  double power_sine_sum = 0.0;  // (1/Q) Sum' Sum_lambda prod_{j<h} (1 - (1-delta) sin^2)
  double final_bound = 0.0;     // (4/delta) Q ((1 + 3 delta)/2)^h
  double target = 0.0;          // Q^(-1/2)

  bool true_le_triangle = false;
  bool triangle_le_holder = false;
  bool holder_eq_block = false;
  bool block_le_power_sine = false;
  bool power_sine_le_final = false;
  bool final_below_target = false;

  // Regime flags.
  bool h_matches_q2 = false;   // 2^h within a factor 2 of Q^2
  bool gamma_below_delta = false;
  bool gamma_below_tenth = false;

  bool ordering_holds() const {
    return true_le_triangle && triangle_le_holder && holder_eq_block && block_le_power_sine && power_sine_le_final;
  }
};

namespace detail {
inline bool le_rel(double a, double b) { return a <= b * (1.0 + 1e-12) + 1e-300; }
}  // namespace detail

/// Evaluates every quantity of the Holder chain bounding Sum'_{q~Q} |R_q|
/// at m = t h / 2 bits and checks that consecutive displays are ordered.
/// The shift-and-average step is represented by its closed-form endpoint.
inline HolderChainReport holder_chain_diagnostic(const Rational& rho, std::uint64_t Q, const BoundParams& params,
                                                 unsigned precision_bits = 53) {
  const double rho_d = rho.get_d();
  require(rho_d >= 0.5 && rho_d < 1.0, "rho must satisfy 1/2 <= rho < 1");
  require(params.t_holder % 2 == 0, "t must be even");
  require(params.t_holder > 4.0 * std::log(1.0 / params.delta) / (rho_d * (1.0 - rho_d)),
          "t below 4 log(1/delta) / (rho (1 - rho)) is out of regime");
  require(params.h >= 1 && params.h <= 40, "h must lie in [1, 40]");
  HolderChainReport rep;
  rep.rho = rho;
  rep.Q = Q;
  rep.params = params;
  const unsigned t = params.t_holder, h = params.h;
  rep.m = t * h / 2;
  const double Qd = static_cast<double>(Q);
  const double half_t = t / 2.0;
  const double delta = params.delta;
  rep.h_matches_q2 = std::fabs(static_cast<double>(h) - 2.0 * std::log2(Qd)) <= 1.0;
  rep.gamma_below_delta = params.gamma < delta;
  rep.gamma_below_tenth = params.gamma < 0.1;
  rep.moduli = odd_squarefree_up_to(2 * Q - 1, Q);

  const BiasedBitMeasure meas(rep.m, rho);
  for (std::uint64_t q : rep.moduli) {
    const RemainderEstimate est = remainder_term(q, meas, precision_bits);
    rep.true_sum += est.abs_value;
    const detail::FactorTable<detail::DoubleBackend> table(detail::DoubleBackend{}, q, rho);
    double triangle = 0.0, block = 0.0, power_sine = 0.0;
    std::vector<double> per_tau(t / 2, 0.0);
    for (std::uint64_t lambda = 1; lambda < q; ++lambda) {
      std::uint64_t a = lambda;
      double total_log = 0.0;
      for (unsigned tau = 0; tau < t / 2; ++tau) {
        double block_log = 0.0;
        for (unsigned j = 0; j < h; ++j) {
          block_log += table.log_mag[a];
          a = (2 * a) % q;
        }
        per_tau[tau] += std::exp(half_t * block_log);
        total_log += block_log;
        if (tau == 0) block += std::exp(half_t * block_log);
      }
      triangle += std::exp(total_log);
      double prod = 1.0;
      std::uint64_t b = lambda;
      for (unsigned j = 0; j < h; ++j) {
        const double s = detail::sin_pi_abs(static_cast<double>(b) / static_cast<double>(q));
        prod *= 1.0 - (1.0 - delta) * s * s;
        b = (2 * b) % q;
      }
      power_sine += prod;
    }
    rep.triangle_sum += triangle / Qd;
    double log_holder = 0.0;
    for (double v : per_tau) log_holder += std::log(v / Qd);
    rep.holder_sum += std::exp(log_holder * 2.0 / t);
    rep.block_sum += block / Qd;
    rep.power_sine_sum += power_sine / Qd;
  }
  rep.final_bound = 4.0 / delta * Qd * std::pow((1.0 + 3.0 * delta) / 2.0, h);
  rep.target = 1.0 / std::sqrt(Qd);

  rep.true_le_triangle = detail::le_rel(rep.true_sum, rep.triangle_sum);
  rep.triangle_le_holder = detail::le_rel(rep.triangle_sum, rep.holder_sum);
  rep.holder_eq_block = std::fabs(rep.holder_sum - rep.block_sum) <= 1e-9 * rep.block_sum;
  rep.block_le_power_sine = detail::le_rel(rep.block_sum, rep.power_sine_sum);
  rep.power_sine_le_final = detail::le_rel(rep.power_sine_sum, rep.final_bound);
  rep.final_below_target = rep.final_bound < rep.target;
  return rep;
}

}  // namespace coinsieve
