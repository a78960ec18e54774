// coinsieve: command-line front end for the coinsieve library.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "coinsieve/coinsieve.hpp"

namespace {

using coinsieve::Rational;
using json = nlohmann::ordered_json;

constexpr const char* kSchema = "coinsieve/v1";

// ---------------------------------------------------------------- formatting

std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += "\r\n";
  };
  line(t.columns);
  for (const auto& r : t.rows) line(r);
  return out;
}

std::string iso_timestamp(std::int64_t epoch) {
  std::time_t tt = static_cast<std::time_t>(epoch);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------- parsing

struct RhoInput {
  Rational value;
  coinsieve::Arithmetic arithmetic = coinsieve::Arithmetic::exact;
};

bool looks_decimal(const std::string& s) { return s.find_first_of(".eE") != std::string::npos; }

double parse_double(const std::string& s) {
  double x = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(x))
    throw coinsieve::DomainError("not a number: " + s);
  return x;
}

// "3/4" and integers go to the exact path, decimals to the float path.
RhoInput parse_rho(const std::string& s) {
  if (looks_decimal(s)) return {coinsieve::rational_from_double(parse_double(s)), coinsieve::Arithmetic::floating};
  return {coinsieve::parse_rational(s), coinsieve::Arithmetic::exact};
}

double parse_real(const std::string& s) {
  if (looks_decimal(s)) return parse_double(s);
  return coinsieve::parse_rational(s).get_d();
}

// Accepts decimals, "a/b", "sqrtN", "sqrt(N)", "1/sqrtN" and "1/sqrt(N)".
double parse_constant(std::string s) {
  std::erase(s, ' ');
  auto parse_atom = [](std::string a) -> double {
    if (a.rfind("sqrt", 0) == 0) {
      a = a.substr(4);
      if (a.size() >= 2 && a.front() == '(' && a.back() == ')') a = a.substr(1, a.size() - 2);
      const double v = parse_real(a);
      if (v < 0) throw coinsieve::DomainError("square root of a negative number");
      return std::sqrt(v);
    }
    return parse_real(a);
  };
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse_atom(s);
  const double den = parse_atom(s.substr(slash + 1));
  if (den == 0.0) throw coinsieve::DomainError("division by zero in " + s);
  return parse_atom(s.substr(0, slash)) / den;
}

std::vector<unsigned> parse_uint_list(const std::string& s) {
  std::vector<unsigned> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    unsigned v = 0;
    auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size() || item.empty())
      throw coinsieve::DomainError("not a list of non-negative integers: " + s);
    out.push_back(v);
  }
  if (out.empty()) throw coinsieve::DomainError("empty list");
  return out;
}

// ---------------------------------------------------------------- options

struct Common {
  std::uint64_t seed = 0;
  unsigned precision_bits = 128;
  unsigned threads = coinsieve::default_threads();
  std::string format = "json";
  std::string out;
  std::string timestamp;
};

struct Options {
  std::string rho = "3/4";
  unsigned m = 20;
  std::uint64_t n = 0;
  std::size_t count = 10;
  std::uint64_t q = 3;
  std::uint64_t q_min = 3;
  std::uint64_t q_max = 99;
  std::uint64_t work_budget = 0;
  std::string compression = "orbit";
  std::string m_list = "16,32";
  double epsilon = 0.1;
  std::uint64_t q_budget = std::uint64_t{1} << 30;
  std::string r_list = "1,2,3";
  std::size_t samples = 1'000'000;
  unsigned z = 7;
  bool exact = false;
  unsigned h = 6;
  double delta = 0.05;
  std::uint64_t points = 0;
  std::uint64_t Q = 32;
  std::string c = "1/sqrt3";
  std::string t = "1/3";
  std::string probs;
  unsigned r = 10;
  double p = 0.0;
  std::string form = "three-term";
  std::uint64_t B = 10;
  std::uint64_t k_max = 0;
  std::uint64_t max_modulus = std::uint64_t{1} << 22;
};

struct Output {
  json doc = json::object();
  json result = json::object();
  Table table;
  bool partial = false;
};

coinsieve::TernaryCoeffDist make_dist(const Options& o, unsigned m) {
  if (!o.probs.empty()) {
    std::vector<Rational> p;
    std::stringstream ss(o.probs);
    std::string item;
    while (std::getline(ss, item, ','))
      p.push_back(looks_decimal(item) ? coinsieve::rational_from_double(parse_double(item))
                                      : coinsieve::parse_rational(item));
    coinsieve::require(p.size() == 3, "--probs needs three values for -1,0,+1");
    return coinsieve::TernaryCoeffDist(p[0], p[1], p[2], m);
  }
  const Rational t = looks_decimal(o.t) ? coinsieve::rational_from_double(parse_double(o.t)) : coinsieve::parse_rational(o.t);
  coinsieve::require(t >= Rational(1, 3) && t <= 1, "--t must lie in [1/3, 1]");
  return coinsieve::dist_with_max_prob(t, m);
}

json dist_json(const coinsieve::TernaryCoeffDist& d) {
  return {{"minus", d.prob(-1).get_str()}, {"zero", d.prob(0).get_str()}, {"plus", d.prob(1).get_str()},
          {"degree", d.m()}};
}

json rate_json(const coinsieve::RateBound& b) {
  return {{"p", num(b.p)},
          {"q", num(b.q)},
          {"r", b.r},
          {"per_digit_rate", num(b.per_digit_rate)},
          {"two_term_rate", num(b.two_term_rate)},
          {"total_bound", num(b.total_bound)},
          {"two_term_total", num(b.two_term_total)},
          {"exponent", num(b.exponent)}};
}

// ---------------------------------------------------------------- commands

void run_mass(const Options& o, const Common&, Output& out) {
  const RhoInput rho = parse_rho(o.rho);
  const coinsieve::BiasedBitMeasure meas(o.m, rho.value, rho.arithmetic);
  const double f = coinsieve::point_mass_float(meas, o.n);
  out.result["n"] = o.n;
  if (rho.arithmetic == coinsieve::Arithmetic::exact) out.result["mass_exact"] = coinsieve::point_mass(meas, o.n).str();
  out.result["mass"] = num(f);
  out.result["digit_entropy_dimension"] = num(coinsieve::digit_entropy_dimension(meas));
  out.result["partial_entropy_dimension"] = num(coinsieve::partial_entropy_dimension(meas));
  out.table.columns = {"n", "mass"};
  out.table.add({std::to_string(o.n), fmt_double(f)});
}

void run_sample(const Options& o, const Common& c, Output& out) {
  const RhoInput rho = parse_rho(o.rho);
  const coinsieve::BiasedBitMeasure meas(o.m, rho.value, rho.arithmetic);
  const auto xs = coinsieve::sample(meas, c.seed, o.count);
  out.result["count"] = o.count;
  out.result["samples"] = xs;
  out.table.columns = {"index", "n"};
  for (std::size_t i = 0; i < xs.size(); ++i) out.table.add({std::to_string(i), std::to_string(xs[i])});
}

void run_rq(const Options& o, const Common& c, Output& out) {
  const RhoInput rho = parse_rho(o.rho);
  const coinsieve::BiasedBitMeasure meas(o.m, rho.value, rho.arithmetic);
  coinsieve::require(o.compression == "orbit" || o.compression == "none", "--compression must be orbit or none");
  const auto mode = o.compression == "orbit" ? coinsieve::Compression::orbit : coinsieve::Compression::none;
  const auto est = coinsieve::remainder_term(o.q, meas, c.precision_bits, mode);
  out.result["q"] = o.q;
  out.result["method"] = coinsieve::to_string(est.method);
  out.result["value"] = num(est.value);
  out.result["value_text"] = est.value_text;
  out.result["abs_value"] = num(est.abs_value);
  out.result["error_bound"] = num(est.error_bound);
  out.result["sign_certified"] = est.sign_certified;
  out.result["log_max_magnitude"] = num(est.log_max_magnitude);
  std::string exact;
  if (rho.arithmetic == coinsieve::Arithmetic::exact) {
    exact = coinsieve::remainder_term_exact(o.q, meas).value_text;
    out.result["exact"] = exact;
  }
  out.table.columns = {"q", "m", "rho", "R_q", "error_bound", "exact"};
  out.table.add({std::to_string(o.q), std::to_string(o.m), rho.value.get_str(), fmt_double(est.value),
                 fmt_double(est.error_bound), exact});
}

void run_sweep(const Options& o, const Common& c, Output& out) {
  const RhoInput rho = parse_rho(o.rho);
  const coinsieve::BiasedBitMeasure meas(o.m, rho.value, rho.arithmetic);
  coinsieve::SweepOptions so;
  so.precision_bits = c.precision_bits;
  so.threads = c.threads;
  so.q_min = o.q_min;
  so.work_budget = o.work_budget;
  const auto rep = coinsieve::sweep_remainders(meas, o.q_max, so);
  out.partial = rep.partial;
  out.result["q_cutoff"] = rep.q_cutoff;
  out.result["cumulative_sum"] = num(rep.cumulative_sum);
  json rows = json::array();
  out.table.columns = {"q", "ord2", "squarefree", "abs_Rq", "error_bound", "cumulative"};
  for (const auto& r : rep.records) {
    rows.push_back({{"q", r.q},
                    {"ord2", r.ord2},
                    {"squarefree", r.squarefree},
                    {"abs_Rq", num(r.abs_rq)},
                    {"error_bound", num(r.error_bound)},
                    {"cumulative", num(r.cumulative)}});
    out.table.add({std::to_string(r.q), std::to_string(r.ord2), r.squarefree ? "true" : "false",
                   fmt_double(r.abs_rq), fmt_double(r.error_bound), fmt_double(r.cumulative)});
  }
  out.result["rows"] = std::move(rows);
}

void run_exponent(const Options& o, const Common& c, Output& out) {
  const RhoInput rho = parse_rho(o.rho);
  coinsieve::ExponentOptions eo;
  eo.threads = c.threads;
  eo.q_budget = o.q_budget;
  const auto rows = coinsieve::estimate_sieving_exponent(rho.value, parse_uint_list(o.m_list), o.epsilon, eo,
                                                         rho.arithmetic);
  json arr = json::array();
  out.table.columns = {"m", "alpha_hat", "q_first_exceeding", "q_scanned", "cumulative", "partial"};
  for (const auto& r : rows) {
    out.partial = out.partial || r.partial;
    arr.push_back({{"m", r.m},
                   {"alpha_hat", num(r.alpha_hat)},
                   {"q_first_exceeding", r.q_first_exceeding},
                   {"q_scanned", r.q_scanned},
                   {"cumulative", num(r.cumulative)},
                   {"partial", r.partial}});
    out.table.add({std::to_string(r.m), fmt_double(r.alpha_hat), std::to_string(r.q_first_exceeding),
                   std::to_string(r.q_scanned), fmt_double(r.cumulative), r.partial ? "true" : "false"});
  }
  out.result["rows"] = std::move(arr);
}

void run_pseudoprimes(const Options& o, const Common& c, Output& out) {
  const RhoInput rho = parse_rho(o.rho);
  const coinsieve::BiasedBitMeasure meas(o.m, rho.value, rho.arithmetic);
  coinsieve::PseudoprimeOptions po;
  po.samples = o.samples;
  po.seed = c.seed;
  po.threads = c.threads;
  const auto rows = coinsieve::pseudoprime_mass(meas, parse_uint_list(o.r_list), po);
  const double logN = o.m * std::log(2.0);
  json arr = json::array();
  out.table.columns = {"r", "mass", "mass_times_logN", "std_error", "exact"};
  for (const auto& r : rows) {
    json row = {{"r", r.r},
                {"mass", num(r.mass)},
                {"mass_times_logN", num(r.mass * logN)},
                {"std_error", num(r.std_error)},
                {"sampled", r.sampled}};
    if (r.exact) row["exact"] = r.exact->get_str();
    arr.push_back(std::move(row));
    out.table.add({std::to_string(r.r), fmt_double(r.mass), fmt_double(r.mass * logN), fmt_double(r.std_error),
                   r.exact ? r.exact->get_str() : ""});
  }
  out.result["rows"] = std::move(arr);
}

void run_legendre(const Options& o, const Common& c, Output& out) {
  const RhoInput rho = parse_rho(o.rho);
  const coinsieve::BiasedBitMeasure meas(o.m, rho.value, rho.arithmetic);
  const auto res = coinsieve::legendre_sieve_demo(meas, o.z, c.precision_bits, o.exact);
  out.result["z"] = res.z;
  out.result["primes"] = res.primes;
  out.result["main_term"] = num(res.main_term);
  out.result["corrected"] = num(res.corrected);
  out.result["error_budget"] = num(res.error_budget);
  if (res.exact) out.result["exact"] = res.exact->get_str();
  out.table.columns = {"z", "main_term", "corrected", "error_budget", "exact"};
  out.table.add({std::to_string(res.z), fmt_double(res.main_term), fmt_double(res.corrected),
                 fmt_double(res.error_budget), res.exact ? res.exact->get_str() : ""});
}

void run_lemmas(const Options& o, const Common& c, Output& out) {
  const auto rep = coinsieve::inequality_property_suite(o.samples, c.seed, c.threads);
  out.result["samples"] = rep.samples;
  out.result["power_sine_violations"] = rep.power_sine_violations;
  out.result["power_sine_min_margin"] = num(rep.power_sine_min_margin);
  out.result["shifted_sine_violations"] = rep.shifted_sine_violations;
  out.result["shifted_sine_min_margin_ratio"] = num(rep.shifted_sine_min_margin_ratio);
  out.table.columns = {"inequality", "samples", "violations", "min_margin"};
  out.table.add({"power_sine", std::to_string(rep.samples), std::to_string(rep.power_sine_violations),
                 fmt_double(rep.power_sine_min_margin)});
  out.table.add({"shifted_sine", std::to_string(rep.samples), std::to_string(rep.shifted_sine_violations),
                 fmt_double(rep.shifted_sine_min_margin_ratio)});
}

void run_integral(const Options& o, const Common&, Output& out) {
  const std::uint64_t points = o.points ? o.points : std::uint64_t{1} << (o.h + 4);
  const auto res = coinsieve::product_integral_identity(o.h, o.delta, points);
  out.result["h"] = o.h;
  out.result["delta"] = num(o.delta);
  out.result["points"] = points;
  out.result["numeric"] = num(res.numeric);
  out.result["closed_form"] = num(res.closed_form);
  out.result["abs_error"] = num(std::fabs(res.numeric - res.closed_form));
  out.table.columns = {"h", "delta", "numeric", "closed_form", "abs_error"};
  out.table.add({std::to_string(o.h), fmt_double(o.delta), fmt_double(res.numeric), fmt_double(res.closed_form),
                 fmt_double(std::fabs(res.numeric - res.closed_form))});
}

void run_chain(const Options& o, const Common& c, Output& out) {
  const RhoInput rho = parse_rho(o.rho);
  const auto params = coinsieve::make_bound_params(rho.value.get_d(), o.delta, o.Q);
  const auto rep = coinsieve::holder_chain_diagnostic(rho.value, o.Q, params, c.precision_bits);
  out.result["Q"] = o.Q;
  out.result["m"] = rep.m;
  out.result["t"] = params.t_holder;
  out.result["h"] = params.h;
  out.result["ell"] = num(params.ell);
  out.result["beta"] = num(params.beta);
  out.result["gamma"] = num(params.gamma);
  out.result["moduli"] = rep.moduli.size();
  const std::vector<std::pair<std::string, double>> steps = {
      {"true_sum", rep.true_sum},   {"triangle_sum", rep.triangle_sum},     {"holder_sum", rep.holder_sum},
      {"block_sum", rep.block_sum}, {"power_sine_sum", rep.power_sine_sum}, {"final_bound", rep.final_bound},
      {"target", rep.target}};
  out.table.columns = {"step", "value"};
  for (const auto& [k, v] : steps) {
    out.result[k] = num(v);
    out.table.add({k, fmt_double(v)});
  }
  out.result["ordering_holds"] = rep.ordering_holds();
  out.result["final_below_target"] = rep.final_below_target;
  out.result["in_regime"] = {{"h_matches_q2", rep.h_matches_q2},
                             {"gamma_below_delta", rep.gamma_below_delta},
                             {"gamma_below_tenth", rep.gamma_below_tenth}};
}

void run_entropy(const Options& o, const Common&, Output& out) {
  const double c = parse_constant(o.c);
  const double t = coinsieve::solve_entropy_threshold(c);
  out.result["c"] = num(c);
  out.result["t"] = num(t);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16f", t);
  out.result["t_text"] = buf;
  out.table.columns = {"c", "t"};
  out.table.add({fmt_double(c), buf});
}

void run_rate(const Options& o, const Common&, Output& out) {
  const auto dist = make_dist(o, o.r);
  coinsieve::require(o.form == "three-term" || o.form == "two-term", "--form must be three-term or two-term");
  const auto form = o.form == "two-term" ? coinsieve::RateForm::two_term : coinsieve::RateForm::three_term;
  const auto b = o.p > 0.0 ? coinsieve::rate_bound(dist, o.r, o.p) : coinsieve::optimize_rate(dist, o.r, form);
  out.result["distribution"] = dist_json(dist);
  out.result["optimized"] = o.p <= 0.0;
  out.result["form"] = o.form;
  out.result["bound"] = rate_json(b);
  out.table.columns = {"p", "q", "r", "per_digit_rate", "two_term_rate", "total_bound", "two_term_total"};
  out.table.add({fmt_double(b.p), fmt_double(b.q), std::to_string(b.r), fmt_double(b.per_digit_rate),
                 fmt_double(b.two_term_rate), fmt_double(b.total_bound), fmt_double(b.two_term_total)});
}

void run_claim(const Options& o, const Common& c, Output& out) {
  const auto dist = make_dist(o, o.m);
  const auto rep = coinsieve::claim_bound(dist, o.B, c.threads, o.max_modulus);
  out.partial = rep.partial;
  out.result["B"] = rep.B;
  out.result["r"] = rep.r;
  out.result["per_digit_rate"] = num(rep.rate.per_digit_rate);
  out.result["total_bound"] = num(rep.rate.total_bound);
  out.result["exact_union"] = rep.exact_union.get_str();
  out.result["exact_union_value"] = num(rep.exact_union.get_d());
  out.result["k_cutoff"] = rep.k_cutoff;
  out.result["two_term_rate"] = num(rep.two_term.two_term_rate);
  out.result["p"] = num(rep.rate.p);
  out.result["union_below_bound"] = rep.union_below_bound;
  out.result["distribution"] = dist_json(dist);
  out.table.columns = {"B", "r", "per_digit_rate", "total_bound", "exact_union", "k_cutoff"};
  out.table.add({std::to_string(rep.B), std::to_string(rep.r), fmt_double(rep.rate.per_digit_rate),
                 fmt_double(rep.rate.total_bound), fmt_double(rep.exact_union.get_d()), std::to_string(rep.k_cutoff)});
}

void run_mc(const Options& o, const Common& c, Output& out) {
  const auto dist = make_dist(o, o.m);
  const std::uint64_t k_max = o.k_max ? o.k_max : 2 * o.B;
  const auto res = coinsieve::monte_carlo_square_divisor(dist, o.B, k_max, o.samples, c.seed, c.threads);
  out.result["B"] = o.B;
  out.result["k_max"] = k_max;
  out.result["samples"] = res.samples;
  out.result["hits"] = res.hits;
  out.result["estimate"] = num(res.estimate);
  out.result["std_error"] = num(res.std_error);
  out.result["distribution"] = dist_json(dist);
  out.table.columns = {"shard", "samples", "hits", "estimate"};
  for (const auto& row : res.trace)
    out.table.add({std::to_string(row.shard), std::to_string(row.samples), std::to_string(row.hits),
                   fmt_double(static_cast<double>(row.hits) / static_cast<double>(row.samples))});
}

// Options that never change the output (threads) are left out of the echo.
json config_echo(const CLI::App* sub, const Common& c) {
  json cfg = json::object();
  cfg["seed"] = c.seed;
  cfg["precision_bits"] = c.precision_bits;
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_name() == "--help" || opt->count() == 0) continue;
    std::string name = opt->get_name();
    while (!name.empty() && name.front() == '-') name.erase(0, 1);
    const auto res = opt->results();
    cfg[name] = res.empty() ? std::string("true") : res.back();
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and high-precision experiments on biased-coin measures, sieve remainders and square divisors"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file with option values");

  Common common;
  app.add_option("--seed", common.seed, "Master seed for all random streams");
  app.add_option("--precision-bits", common.precision_bits, "Working precision in bits (53 = double)")
      ->check(CLI::Range(53u, 4096u));
  app.add_option("--threads", common.threads, "Worker threads; never changes results")->check(CLI::Range(1u, 1024u));
  app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", common.out, "Output file (default: stdout)");
  app.add_option("--timestamp", common.timestamp,
                 "Timestamp recorded in JSON output (default: SOURCE_DATE_EPOCH or the epoch)");

  Options o;
  using Runner = void (*)(const Options&, const Common&, Output&);
  std::vector<std::pair<CLI::App*, Runner>> commands;
  auto add = [&](const char* name, const char* help, Runner run) {
    CLI::App* sub = app.add_subcommand(name, help);
    commands.emplace_back(sub, run);
    return sub;
  };

  auto* mass = add("mass", "Point mass of n and the measure's dimensions", run_mass);
  mass->add_option("--rho", o.rho, "P(bit = 0): rational a/b (exact) or decimal (float)");
  mass->add_option("--m", o.m, "Number of binary digits");
  mass->add_option("--n", o.n, "Integer in [0, 2^m)");

  auto* smp = add("sample", "Draw integers from the measure", run_sample);
  smp->add_option("--rho", o.rho, "P(bit = 0)");
  smp->add_option("--m", o.m, "Number of binary digits (<= 64)");
  smp->add_option("--count", o.count, "Number of samples");

  auto* rq = add("rq", "Remainder term R_q with a rigorous error bound", run_rq);
  rq->add_option("--q", o.q, "Odd modulus");
  rq->add_option("--m", o.m, "Number of binary digits");
  rq->add_option("--rho", o.rho, "P(bit = 0); a/b also prints the exact value");
  rq->add_option("--compression", o.compression, "orbit or none");

  auto* sweep = add("sweep", "|R_q| over odd squarefree q <= q_max", run_sweep);
  sweep->add_option("--rho", o.rho, "P(bit = 0)");
  sweep->add_option("--m", o.m, "Number of binary digits");
  sweep->add_option("--q-min", o.q_min, "Smallest modulus");
  sweep->add_option("--q-max", o.q_max, "Largest modulus");
  sweep->add_option("--work-budget", o.work_budget, "Cap on the sum of included q (0 = none)");

  auto* expo = add("exponent", "Empirical sieving exponent", run_exponent);
  expo->add_option("--rho", o.rho, "P(bit = 0)");
  expo->add_option("--m", o.m_list, "Comma-separated increasing bit counts");
  expo->add_option("--epsilon", o.epsilon, "Mass threshold");
  expo->add_option("--q-budget", o.q_budget, "Largest modulus examined");

  auto* pp = add("pseudoprimes", "Mass of integers with at most r prime factors", run_pseudoprimes);
  pp->add_option("--rho", o.rho, "P(bit = 0)");
  pp->add_option("--m", o.m, "Number of binary digits");
  pp->add_option("--r", o.r_list, "Comma-separated r values");
  pp->add_option("--samples", o.samples, "Samples when m is too large to enumerate");

  auto* leg = add("legendre", "Legendre sieve by odd primes up to z", run_legendre);
  leg->add_option("--rho", o.rho, "P(bit = 0)");
  leg->add_option("--m", o.m, "Number of binary digits");
  leg->add_option("--z", o.z, "Sieve limit");
  leg->add_flag("--exact", o.exact, "Also compute the exact sifted mass");

  auto* lem = add("lemmas", "Random property checks of the two trigonometric inequalities", run_lemmas);
  lem->add_option("--samples", o.samples, "Tuples per inequality");

  auto* integ = add("integral312", "Product integral against its closed form", run_integral);
  integ->set_help_flag("--help", "Print this help message and exit");
  integ->add_option("--h", o.h, "Number of factors");
  integ->add_option("--delta", o.delta, "delta in (0, 1)");
  integ->add_option("--points", o.points, "Quadrature points (power of two; default 2^(h+4))");

  auto* chain = add("chain", "Holder-chain diagnostic over q in [Q, 2Q)", run_chain);
  chain->add_option("--rho", o.rho, "P(bit = 0)");
  chain->add_option("--delta", o.delta, "delta in (0, 1)");
  chain->add_option("--Q", o.Q, "Dyadic range start");

  auto* ent = add("entropy", "Solve t^t (1-t)^(1-t) = c on [1/2, 1)", run_entropy);
  ent->add_option("--c", o.c, "Constant, e.g. 1/sqrt3 or 0.9");

  auto* rate = add("rate", "Holder rate bound for the square-divisor event", run_rate);
  rate->add_option("--t", o.t, "P(coefficient = 0), the rest split evenly");
  rate->add_option("--probs", o.probs, "Explicit P(-1),P(0),P(+1)");
  rate->add_option("--r", o.r, "Digit count");
  rate->add_option("--p", o.p, "Holder exponent (omit to optimize)");
  rate->add_option("--form", o.form, "three-term or two-term");

  auto* claim = add("claim", "Rate bound against the exact union over k in [B, 2B]", run_claim);
  claim->add_option("--t", o.t, "P(coefficient = 0), the rest split evenly");
  claim->add_option("--probs", o.probs, "Explicit P(-1),P(0),P(+1)");
  claim->add_option("--m", o.m, "Polynomial degree");
  claim->add_option("--B", o.B, "Lower end of the k range");
  claim->add_option("--max-modulus", o.max_modulus, "Largest k^2 handled by the residue DP");

  auto* mc = add("mc-squares", "Monte Carlo frequency of a square divisor k^2 | P(3)", run_mc);
  mc->add_option("--t", o.t, "P(coefficient = 0), the rest split evenly");
  mc->add_option("--probs", o.probs, "Explicit P(-1),P(0),P(+1)");
  mc->add_option("--m", o.m, "Polynomial degree");
  mc->add_option("--B", o.B, "Smallest k");
  mc->add_option("--k-max", o.k_max, "Largest k (default 2B)");
  mc->add_option("--samples", o.samples, "Number of samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  std::string timestamp = common.timestamp;
  if (timestamp.empty()) {
    const char* sde = std::getenv("SOURCE_DATE_EPOCH");
    timestamp = sde ? iso_timestamp(std::strtoll(sde, nullptr, 10)) : "1970-01-01T00:00:00Z";
  }

  for (auto& [sub, run] : commands) {
    if (!sub->parsed()) continue;
    Output out;
    out.doc["schema"] = kSchema;
    out.doc["command"] = sub->get_name();
    out.doc["timestamp"] = timestamp;
    out.doc["config"] = config_echo(sub, common);
    int code = 0;
    try {
      run(o, common, out);
    } catch (const coinsieve::BudgetExceeded& e) {
      out.partial = true;
      out.doc["error"] = e.what();
      code = 3;
    } catch (const coinsieve::DomainError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
    if (out.partial && code == 0) code = 3;
    out.doc["partial"] = out.partial;
    out.doc["result"] = std::move(out.result);
    const std::string text = common.format == "csv" ? to_csv(out.table) : out.doc.dump(2) + "\n";
    if (common.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(common.out, std::ios::binary);
      if (!f) {
        std::cerr << "error: cannot open " << common.out << "\n";
        return 2;
      }
      f << text;
    }
    if (code == 3) std::cerr << "warning: budget exhausted; partial results written\n";
    return code;
  }
  return 1;
}
