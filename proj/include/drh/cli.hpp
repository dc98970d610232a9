#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drh/cache.hpp"
#include "drh/dirichlet.hpp"
#include "drh/elliptic.hpp"
#include "drh/euler_product.hpp"
#include "drh/function_field.hpp"
#include "drh/lfunction.hpp"
#include "drh/primes.hpp"
#include "drh/race.hpp"
#include "drh/report.hpp"
#include "drh/tau.hpp"

namespace drh::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitVerdict = 2;

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"sieve", "product", "drh-verify", "race", "tau-bias",
                                          "bsd",   "ff-verify", "ff-trace", "report"};
  return c;
}

// ---------------------------------------------------------------------------
// Scalar parsing
// ---------------------------------------------------------------------------

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ArgumentError(key + ": expected a finite number, got '" + text + "'");
  return v;
}

inline i64 parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  i64 v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) throw ArgumentError(key + ": expected an integer, got '" + text + "'");
  return v;
}

inline u64 parse_uint(const std::string& key, const std::string& text) {
  const i64 v = parse_int(key, text);
  if (v < 0) throw ArgumentError(key + ": must be nonnegative");
  return static_cast<u64>(v);
}

// "0.5+14.1347i", "0.5", "-2i", "1e-3-2.5e2i".
inline cplx parse_complex(const std::string& text) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.empty()) throw ArgumentError("s: empty complex number");
  if (t.back() != 'i') return {parse_double("s", t), 0.0};
  t.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t i = t.size(); i-- > 1;)
    if ((t[i] == '+' || t[i] == '-') && t[i - 1] != 'e' && t[i - 1] != 'E') {
      split = i;
      break;
    }
  if (split == std::string::npos) {
    if (t.empty() || t == "+" || t == "-") return {0.0, t == "-" ? -1.0 : 1.0};
    return {0.0, parse_double("s", t)};
  }
  const std::string re = t.substr(0, split), im = t.substr(split);
  const double imv = (im == "+" || im == "-") ? (im == "-" ? -1.0 : 1.0) : parse_double("s", im[0] == '+' ? im.substr(1) : im);
  return {parse_double("s", re), imv};
}

inline std::string format_double(double v) { return report::fmt(v); }

inline std::string format_complex(cplx z) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
  return buf;
}

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

struct RunConfig {
  std::string command;
  double limit = 1e6;
  std::size_t checkpoints = 64;
  cplx s{0.5, 0.0};
  std::string cache_dir;
  unsigned threads = 1;
  std::string out;   // CSV destination, "-" for stdout
  std::string json;  // JSON destination, "-" for stdout
  std::optional<double> tolerance;
  std::string spec = "zeta";
  u64 q = 4;
  i64 a = 1;
  i64 b = 3;
  double weight = 0.5;
  std::string modulus = "1,0,1";
  std::size_t character = 1;
  int lmax = 12;
  int dmax = 14;
  int r = 0;
  std::optional<cplx> target;
  std::optional<double> expect_rank;
  std::vector<std::string> inputs;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::optional<std::string>(const RunConfig&)> get;
};

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

inline const std::vector<Key>& keys() {
  using S = std::optional<std::string>;
  static const std::vector<Key> k{
      {"command", [](RunConfig& c, const std::string& v) { c.command = trim(v); }, [](const RunConfig& c) -> S { return c.command; }},
      {"limit", [](RunConfig& c, const std::string& v) { c.limit = parse_double("limit", v); },
       [](const RunConfig& c) -> S { return format_double(c.limit); }},
      {"checkpoints", [](RunConfig& c, const std::string& v) { c.checkpoints = parse_uint("checkpoints", v); },
       [](const RunConfig& c) -> S { return std::to_string(c.checkpoints); }},
      {"s", [](RunConfig& c, const std::string& v) { c.s = parse_complex(v); }, [](const RunConfig& c) -> S { return format_complex(c.s); }},
      {"cache_dir", [](RunConfig& c, const std::string& v) { c.cache_dir = trim(v); }, [](const RunConfig& c) -> S { return c.cache_dir; }},
      {"threads",
       [](RunConfig& c, const std::string& v) {
         const u64 t = parse_uint("threads", v);
         if (t < 1 || t > 1024) throw ArgumentError("threads: must lie in [1, 1024]");
         c.threads = static_cast<unsigned>(t);
       },
       [](const RunConfig& c) -> S { return std::to_string(c.threads); }},
      {"out", [](RunConfig& c, const std::string& v) { c.out = trim(v); }, [](const RunConfig& c) -> S { return c.out; }},
      {"json", [](RunConfig& c, const std::string& v) { c.json = trim(v); }, [](const RunConfig& c) -> S { return c.json; }},
      {"tolerance", [](RunConfig& c, const std::string& v) { c.tolerance = parse_double("tolerance", v); },
       [](const RunConfig& c) -> S { return c.tolerance ? S(format_double(*c.tolerance)) : std::nullopt; }},
      {"spec", [](RunConfig& c, const std::string& v) { c.spec = trim(v); }, [](const RunConfig& c) -> S { return c.spec; }},
      {"q", [](RunConfig& c, const std::string& v) { c.q = parse_uint("q", v); }, [](const RunConfig& c) -> S { return std::to_string(c.q); }},
      {"a", [](RunConfig& c, const std::string& v) { c.a = parse_int("a", v); }, [](const RunConfig& c) -> S { return std::to_string(c.a); }},
      {"b", [](RunConfig& c, const std::string& v) { c.b = parse_int("b", v); }, [](const RunConfig& c) -> S { return std::to_string(c.b); }},
      {"weight", [](RunConfig& c, const std::string& v) { c.weight = parse_double("weight", v); },
       [](const RunConfig& c) -> S { return format_double(c.weight); }},
      {"modulus", [](RunConfig& c, const std::string& v) { c.modulus = trim(v); }, [](const RunConfig& c) -> S { return c.modulus; }},
      {"char", [](RunConfig& c, const std::string& v) { c.character = parse_uint("char", v); },
       [](const RunConfig& c) -> S { return std::to_string(c.character); }},
      {"lmax", [](RunConfig& c, const std::string& v) { c.lmax = static_cast<int>(parse_int("lmax", v)); },
       [](const RunConfig& c) -> S { return std::to_string(c.lmax); }},
      {"dmax", [](RunConfig& c, const std::string& v) { c.dmax = static_cast<int>(parse_int("dmax", v)); },
       [](const RunConfig& c) -> S { return std::to_string(c.dmax); }},
      {"r", [](RunConfig& c, const std::string& v) { c.r = static_cast<int>(parse_int("r", v)); },
       [](const RunConfig& c) -> S { return std::to_string(c.r); }},
      {"target", [](RunConfig& c, const std::string& v) { c.target = parse_complex(v); },
       [](const RunConfig& c) -> S { return c.target ? S(format_complex(*c.target)) : std::nullopt; }},
      {"expect_rank", [](RunConfig& c, const std::string& v) { c.expect_rank = parse_double("expect_rank", v); },
       [](const RunConfig& c) -> S { return c.expect_rank ? S(format_double(*c.expect_rank)) : std::nullopt; }},
      {"in", [](RunConfig& c, const std::string& v) { c.inputs = split_list(v); },
       [](const RunConfig& c) -> S {
         if (c.inputs.empty()) return std::nullopt;
         std::string s;
         for (std::size_t i = 0; i < c.inputs.size(); ++i) s += (i ? "," : "") + c.inputs[i];
         return s;
       }},
  };
  return k;
}

}  // namespace detail

inline void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : detail::keys())
    if (key == k.name) {
      k.set(cfg, value);
      return;
    }
  throw ArgumentError("unknown configuration key '" + key + "'");
}

// One "key = value" line per set field, in a fixed order. Parsing it back
// with parse_config_text reproduces the config exactly.
inline std::string canonical(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : detail::keys())
    if (auto v = k.get(cfg)) out += std::string(k.name) + " = " + *v + "\n";
  return out;
}

inline void parse_config_text(const std::string& text, RunConfig& cfg) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ArgumentError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    try {
      set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ArgumentError& e) {
      throw ArgumentError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline RunConfig parse_canonical(const std::string& text) {
  RunConfig cfg;
  cfg.out.clear();
  parse_config_text(text, cfg);
  return cfg;
}

inline void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  parse_config_text(ss.str(), cfg);
}

// Defaults, then the environment, then the config file, then flags.
inline RunConfig defaults_from_env() {
  RunConfig cfg;
  cfg.threads = default_threads();
  cfg.cache_dir = cache::default_dir().string();
  return cfg;
}

inline void validate(const RunConfig& c) {
  bool known = false;
  for (const auto& k : commands()) known = known || c.command == k;
  if (!known) throw ArgumentError("unknown command '" + c.command + "'");
  if (!(c.limit >= 2) || c.limit > static_cast<double>(PrimeTable::kMaxLimit) || std::floor(c.limit) != c.limit)
    throw ArgumentError("limit: must be an integer in [2, 2^40]");
  if (c.checkpoints < 1 || c.checkpoints > 100000) throw ArgumentError("checkpoints: must lie in [1, 100000]");
  if (c.threads < 1 || c.threads > 1024) throw ArgumentError("threads: must lie in [1, 1024]");
  if (c.tolerance && !(*c.tolerance > 0)) throw ArgumentError("tolerance: must be positive");
  if (!(c.weight >= 0)) throw ArgumentError("weight: must be >= 0");
  if (c.q < 1) throw ArgumentError("q: must be >= 1");
  if (c.lmax < 1 || c.lmax > 40) throw ArgumentError("lmax: must lie in [1, 40]");
  if (c.dmax < 1 || c.dmax > 40) throw ArgumentError("dmax: must lie in [1, 40]");
  if (c.r < 0 || c.r > 3) throw ArgumentError("r: must lie in [0, 3]");
  if (c.cache_dir.empty()) throw ArgumentError("cache_dir: must not be empty");
  if (c.command == "race" && (c.a < 0 || c.b < 0)) throw ArgumentError("race: residues a and b must be >= 0");
  if (c.command == "tau-bias" && c.limit > static_cast<double>(TauTable::kMaxN)) throw ArgumentError("tau-bias: limit must be <= 10^6");
  if (c.command == "report" && c.inputs.empty()) throw ArgumentError("report: at least one --in file is required");
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

inline std::string csv_text(const std::function<void(std::ostream&)>& f) {
  std::ostringstream ss;
  f(ss);
  return ss.str();
}

inline void emit(const std::string& dest, const std::string& fallback, const std::string& text, Streams& io) {
  const std::string d = dest.empty() ? fallback : dest;
  if (d.empty()) return;
  report::write_text(d, text, io.out);
}

inline PrimeTable primes_for(const RunConfig& c) {
  return cache::load_or_sieve(c.cache_dir, static_cast<u64>(c.limit), c.threads);
}

inline std::string label_field(const std::string& label, const std::string& key) {
  const auto pos = label.find(key + "=");
  if (pos == std::string::npos) throw ArgumentError("spec label '" + label + "' lacks " + key);
  const auto start = pos + key.size() + 1;
  return label.substr(start, label.find(':', start) - start);
}

inline std::vector<double> checkpoints_for(const RunConfig& c) { return default_checkpoints(c.limit, c.checkpoints); }

// Catalog lookup with the tau and a_p tables routed through the cache.
inline LFunctionSpec spec_for(const RunConfig& c, const PrimeTable& primes) {
  if (c.spec == "delta") {
    if (c.limit > static_cast<double>(TauTable::kMaxN)) throw CapacityError("delta: limit must be <= 10^6 (tau table size)");
    return delta_spec(std::make_shared<const TauTable>(cache::load_or_build_tau(c.cache_dir, static_cast<std::size_t>(c.limit))));
  }
  if (c.spec.rfind("ec:", 0) == 0) {
    const EllipticCurve E(parse_int("a", label_field(c.spec, "a")), parse_int("b", label_field(c.spec, "b")));
    auto ap = std::make_shared<const ApTable>(cache::load_or_build_ap(c.cache_dir, E, primes, static_cast<u64>(c.limit), c.threads));
    return elliptic_spec(E, ap);
  }
  return spec_from_label(c.spec);
}

inline int verdict_exit(const std::optional<bool>& pass) { return pass && !*pass ? kExitVerdict : kExitOk; }

inline int run_sieve(const RunConfig& c, Streams& io) {
  const auto primes = primes_for(c);
  io.out << primes.size() << " primes\n";
  if (!c.out.empty() || !c.json.empty()) {
    const auto xs = checkpoints_for(c);
    report::json j;
    j["kind"] = "sieve";
    j["limit"] = primes.limit();
    j["count"] = primes.size();
    report::json rows = report::json::array();
    std::string csv = "x,theta,psi,mertens,li\n";
    for (double x : xs) {
      const auto sm = summatory(primes, x);
      const double li = x > 1 ? logarithmic_integral(x) : std::nan("");
      csv += report::fmt(x) + ',' + report::fmt(sm.theta) + ',' + report::fmt(sm.psi) + ',' + report::fmt(sm.mertens) + ',' + report::fmt(li) + '\n';
      rows.push_back({{"x", x}, {"theta", sm.theta}, {"psi", sm.psi}, {"mertens", sm.mertens}, {"li", li}});
    }
    j["checkpoints"] = std::move(rows);
    emit(c.out, "", csv, io);
    emit(c.json, "", report::dump(j), io);
  }
  return kExitOk;
}

inline int run_product(const RunConfig& c, Streams& io) {
  const auto primes = primes_for(c);
  const auto spec = spec_for(c, primes);
  const auto xs = checkpoints_for(c);
  const auto tr = partial_product_trace(spec, c.s, primes, xs, c.threads);
  emit(c.out, "-", csv_text([&](std::ostream& o) { report::write_trace_csv(o, tr); }), io);
  if (!c.json.empty()) {
    auto j = report::trace_json(tr);
    // zeta in the pole region: raw data for the compensated comparison
    if (spec.label == "zeta" && c.s.real() <= 1.0) {
      report::json pole = report::json::array();
      for (const auto& smp : zeta_pole_case(c.s, 0, primes, xs, c.threads))
        pole.push_back({{"x", smp.x},
                        {"log_product", report::complex_json(smp.log_product)},
                        {"compensator", report::complex_json(smp.compensator)},
                        {"ratio", report::complex_json(smp.ratio)},
                        {"psi_minus_x", smp.psi_minus_x},
                        {"theta_minus_x", smp.theta_minus_x}});
      j["pole_case"] = std::move(pole);
    }
    emit(c.json, "", report::dump(j), io);
  }
  return kExitOk;
}

inline int run_drh_verify(const RunConfig& c, Streams& io) {
  const auto primes = primes_for(c);
  const auto spec = spec_for(c, primes);
  cplx l_target;
  if (c.target) {
    l_target = *c.target;
  } else if (spec.label == "zeta") {
    if (c.s.real() <= 1.0)
      throw ArgumentError("drh-verify: zeta with Re s <= 1 is the pole case; use 'product --spec zeta --json' for the raw data");
    l_target = l_value(character_by_index(1, 0), c.s, c.r);
  } else if (spec.label.rfind("dirichlet:", 0) == 0) {
    const auto chi = character_by_index(parse_uint("q", label_field(spec.label, "q")), parse_uint("idx", label_field(spec.label, "idx")));
    l_target = l_value(chi, c.s, c.r);
  } else {
    throw ArgumentError("drh-verify: no reference L-value for '" + spec.label + "'; supply --target");
  }
  auto rep = drh_normalize(partial_product_trace(spec, c.s, primes, checkpoints_for(c), c.threads), c.r, spec.nu, l_target);
  rep.tolerance = c.tolerance.value_or(0.15);
  rep.pass = rep.log_avg_dev < *rep.tolerance;
  if (!c.out.empty()) emit(c.out, "", csv_text([&](std::ostream& o) { report::write_trace_csv(o, rep.trace); }), io);
  emit(c.json, "-", report::dump(report::convergence_json(rep)), io);
  return verdict_exit(rep.pass);
}

inline int run_race(const RunConfig& c, Streams& io) {
  const auto primes = primes_for(c);
  auto series = race_series(c.q, static_cast<u64>(c.a), static_cast<u64>(c.b), c.weight, primes, checkpoints_for(c), c.threads);
  loglog_fit(series);
  std::optional<double> predicted;
  std::optional<bool> pass;
  const double tol = c.tolerance.value_or(0.25);
  if (c.weight == 0.5) {
    predicted = predicted_race_slope(c.q, static_cast<u64>(c.a), static_cast<u64>(c.b));
    pass = std::abs(series.fit->slope - *predicted) <= tol;
  }
  auto j = report::series_json(series, "race");
  j["q"] = c.q;
  j["a"] = c.a;
  j["b"] = c.b;
  j["predicted_slope"] = predicted ? report::json(*predicted) : report::json(nullptr);
  if (c.q == 4 && c.a % 4 == 1 && c.b % 4 == 3) j["classical_density"] = classical_race_density(primes, primes.limit());
  j["verdict"] = report::verdict_json(predicted ? std::optional<double>(tol) : std::nullopt, pass);
  emit(c.out, "-", csv_text([&](std::ostream& o) { report::write_series_csv(o, series); }), io);
  emit(c.json, "-", report::dump(j), io);
  return verdict_exit(pass);
}

inline int run_tau_bias(const RunConfig& c, Streams& io) {
  const auto primes = primes_for(c);
  const auto tau = cache::load_or_build_tau(c.cache_dir, static_cast<std::size_t>(c.limit));
  auto series = tau_bias_series(tau, primes, checkpoints_for(c));
  loglog_fit(series);
  const double tol = c.tolerance.value_or(0.3);
  const bool pass = std::abs(series.fit->slope - 0.5) <= tol;
  auto j = report::series_json(series, "tau_bias");
  j["predicted_slope"] = 0.5;
  j["verdict"] = report::verdict_json(tol, pass);
  emit(c.out, "-", csv_text([&](std::ostream& o) { report::write_series_csv(o, series); }), io);
  emit(c.json, "-", report::dump(j), io);
  return verdict_exit(pass);
}

inline int run_bsd(const RunConfig& c, Streams& io) {
  const EllipticCurve E(c.a, c.b);
  const auto primes = primes_for(c);
  const auto ap = cache::load_or_build_ap(c.cache_dir, E, primes, static_cast<u64>(c.limit), c.threads);
  const auto tr = bsd_product_trace(E, ap, checkpoints_for(c));
  const auto fit = rank_fit(tr);
  const double split = bsd_log_product_split(E, ap, c.limit);
  report::json j = report::trace_json(tr);
  j["kind"] = "bsd";
  j["a"] = c.a;
  j["b"] = c.b;
  const i128 d = E.disc();
  j["disc"] = (d < 0 ? "-" : "") + [&] {
    u128 m = static_cast<u128>(d < 0 ? -d : d);
    std::string s;
    do {
      s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(m % 10)));
      m /= 10;
    } while (m);
    return s;
  }();
  j["bad_primes"] = E.bad_primes();
  j["possibly_nonminimal_primes"] = E.possibly_nonminimal_primes();
  j["rank_fit"] = {{"r_hat", fit.r_hat}, {"logC_hat", fit.logC_hat}, {"residual", fit.residual}};
  j["split_form_difference"] = std::abs(split - tr.log_values.back().real());
  std::optional<bool> pass;
  std::optional<double> tol;
  if (c.expect_rank) {
    tol = c.tolerance.value_or(0.5);
    pass = std::abs(fit.r_hat - *c.expect_rank) <= *tol;
  }
  j["expect_rank"] = c.expect_rank ? report::json(*c.expect_rank) : report::json(nullptr);
  j["verdict"] = report::verdict_json(tol, pass);
  emit(c.out, "-", csv_text([&](std::ostream& o) { report::write_trace_csv(o, tr); }), io);
  emit(c.json, "-", report::dump(j), io);
  return verdict_exit(pass);
}

inline ff::FFCharacter ff_character(const RunConfig& c) {
  if (!is_prime_u64(c.q)) throw ArgumentError("q: function-field commands need a prime q");
  const auto A = ff::FqPoly::parse(c.q, c.modulus);
  if (A.degree() < 1 || !A.is_monic()) throw ArgumentError("modulus: must be monic of degree >= 1 (coefficients lowest first)");
  return ff::FFCharacterGroup(A).character(c.character);
}

inline int run_ff_verify(const RunConfig& c, Streams& io) {
  const auto chi = ff_character(c);
  const auto pc = ff::place_census(c.q, c.dmax, {chi.modulus}, c.threads);
  const auto rep = ff::ff_drh_verify(chi, c.dmax, pc, 0);
  const double tol = c.tolerance.value_or(0.05);
  // verdict on the last three degrees
  const int lo = std::max(1, c.dmax - 2);
  double window_dev = 0;
  for (std::size_t i = 0; i < rep.degrees.size(); ++i)
    if (rep.degrees[i] >= lo) window_dev = std::max(window_dev, rep.deviations[i]);
  const bool pass = window_dev < tol;
  if (!c.out.empty()) emit(c.out, "", csv_text([&](std::ostream& o) { report::write_trace_csv(o, rep.trace); }), io);
  auto j = report::ff_convergence_json(chi, rep, tol, pass);
  j["verdict"]["degrees"] = {lo, c.dmax};
  j["verdict"]["max_dev"] = window_dev;
  emit(c.json, "-", report::dump(j), io);
  return verdict_exit(pass);
}

inline int run_ff_trace(const RunConfig& c, Streams& io) {
  const auto chi = ff_character(c);
  const auto pc = ff::place_census(c.q, c.lmax, {chi.modulus}, c.threads);
  const auto tc = ff::trace_formula_check(chi, c.lmax, pc, 0);
  const double tol = c.tolerance.value_or(1e-8);
  const bool pass = tc.max_residual < tol;
  char line[64];
  std::snprintf(line, sizeof line, "max residual %.3e\n", tc.max_residual);
  io.out << line;
  if (!c.out.empty()) {
    std::string csv = "l,re_lhs,im_lhs,re_rhs,im_rhs\n";
    for (std::size_t l = 1; l < tc.lhs.size(); ++l)
      csv += std::to_string(l) + ',' + report::fmt(tc.lhs[l].real()) + ',' + report::fmt(tc.lhs[l].imag()) + ',' +
             report::fmt(tc.rhs[l].real()) + ',' + report::fmt(tc.rhs[l].imag()) + '\n';
    emit(c.out, "", csv, io);
  }
  if (!c.json.empty()) emit(c.json, "", report::dump(report::trace_check_json(chi, tc, tol, pass)), io);
  return verdict_exit(pass);
}

// Summarizes previously written JSON reports; fails if any carries a failing verdict.
inline int run_report(const RunConfig& c, Streams& io) {
  bool any_fail = false;
  report::json summary = report::json::array();
  for (const auto& path : c.inputs) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read report '" + path + "'");
    report::json j;
    try {
      j = report::json::parse(in);
    } catch (const std::exception& e) {
      throw ArgumentError("report '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("kind")) throw ArgumentError("report '" + path + "' lacks a kind field");
    std::string verdict = "n/a";
    if (j.contains("verdict") && j["verdict"].is_object() && j["verdict"]["pass"].is_boolean()) {
      const bool p = j["verdict"]["pass"].get<bool>();
      verdict = p ? "pass" : "fail";
      any_fail = any_fail || !p;
    }
    const std::string label = j.contains("label") ? j["label"].get<std::string>() : "";
    io.out << path << ": " << j["kind"].get<std::string>() << (label.empty() ? "" : " " + label) << " " << verdict << "\n";
    summary.push_back({{"path", path}, {"kind", j["kind"]}, {"label", label}, {"verdict", verdict}});
  }
  if (!c.json.empty()) emit(c.json, "", report::dump(report::json{{"kind", "summary"}, {"reports", summary}}), io);
  return any_fail ? kExitVerdict : kExitOk;
}

}  // namespace detail

inline int dispatch(const RunConfig& cfg, Streams io) {
  validate(cfg);
  std::error_code ec;
  std::filesystem::create_directories(cfg.cache_dir, ec);
  const std::string& cmd = cfg.command;
  if (cmd == "sieve") return detail::run_sieve(cfg, io);
  if (cmd == "product") return detail::run_product(cfg, io);
  if (cmd == "drh-verify") return detail::run_drh_verify(cfg, io);
  if (cmd == "race") return detail::run_race(cfg, io);
  if (cmd == "tau-bias") return detail::run_tau_bias(cfg, io);
  if (cmd == "bsd") return detail::run_bsd(cfg, io);
  if (cmd == "ff-verify") return detail::run_ff_verify(cfg, io);
  if (cmd == "ff-trace") return detail::run_ff_trace(cfg, io);
  return detail::run_report(cfg, io);
}

// Builds the config from defaults, environment, --config file and flags.
// Returns nullopt (with exit code set) when help was requested or parsing failed.
inline std::optional<RunConfig> parse_args(int argc, const char* const* argv, Streams io, int& exit_code) {
  CLI::App app{"Partial Euler products, prime races and function-field L-polynomials"};
  app.name("drh");
  std::string command, config_path;
  app.add_option("command", command, "sieve | product | drh-verify | race | tau-bias | bsd | ff-verify | ff-trace | report")->required();
  app.add_option("--config", config_path, "file of 'key = value' lines applied before flags");
  std::map<std::string, std::string> given;
  std::vector<std::string> inputs;
  std::vector<std::pair<std::string, CLI::Option*>> opts;
  for (const auto& k : detail::keys()) {
    const std::string name = k.name;
    if (name == "command") continue;
    std::string flag = name;
    for (auto& ch : flag)
      if (ch == '_') ch = '-';
    if (name == "in") {
      opts.emplace_back(name, app.add_option("--in", inputs, "input JSON report (repeatable)"));
      continue;
    }
    opts.emplace_back(name, app.add_option("--" + flag, given[name]));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    exit_code = app.exit(e, io.out, io.err);
    if (exit_code != 0) exit_code = kExitError;
    return std::nullopt;
  }
  RunConfig cfg = defaults_from_env();
  if (!config_path.empty()) load_config_file(config_path, cfg);
  cfg.command = command;
  for (const auto& [name, opt] : opts) {
    if (opt->count() == 0) continue;
    if (name == "in")
      cfg.inputs = inputs;
    else
      set_key(cfg, name, given[name]);
  }
  return cfg;
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Streams io{out, err};
  try {
    int code = kExitOk;
    auto cfg = parse_args(argc, argv, io, code);
    if (!cfg) return code;
    return dispatch(*cfg, io);
  } catch (const Error& e) {
    err << "drh: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "drh: error: " << e.what() << "\n";
  }
  return kExitError;
}

}  // namespace drh::cli
