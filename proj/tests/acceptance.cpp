// Acceptance run: one PASS/FAIL line per criterion. `acceptance --only N` runs a single one.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include <unistd.h>

#include "drh/drh.hpp"

using namespace drh;
using namespace drh::ff;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAIL]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

const PrimeTable& primes_1e8() {
  static const PrimeTable t = sieve_primes(100000000);
  return t;
}

std::string data_file(const std::string& name) { return std::string(DRH_TEST_DATA) + "/" + name; }

// q = 3, A = T^2 + 1: the order-8 odd character (index 1) and the even quadratic one (index 4).
Outcome criterion_1() {
  Outcome o;
  Stopwatch sw;
  const FqPoly A = FqPoly::parse(3, "1,0,1");
  const FFCharacterGroup G(A);
  const auto pc = place_census(3, 14, {A}, 1);
  const auto odd = ff_drh_verify(G.character(1), 14, pc, 0);
  double worst = 0;
  for (int D = 12; D <= 14; ++D) worst = std::max(worst, odd.deviations[D - 1]);
  o.check(odd.lpoly.weight_error < 1e-8 && G.character(1).order == 8 && !G.character(1).is_even, "order-8 odd character");
  o.check(worst < 0.05, "order 8: max |R(D)-1| over D in [12,14] = " + fmt("%.3e", worst));
  const auto even = ff_drh_verify(G.character(4), 14, pc, 0);
  const double d10 = even.deviations[9];
  o.check(G.character(4).order == 2 && G.character(4).is_even, "even quadratic character");
  o.check(d10 < 1e-3, "quadratic: |R(10)-1| = " + fmt("%.3e", d10) + " (D=14: " + fmt("%.3e", even.deviations[13]) + ")");
  const double t = sw.seconds();
  o.check(t < 60, "runtime " + fmt("%.1f", t) + " s");
  return o;
}

std::vector<FqPoly> monic_up_to(u64 q, int deg) {
  std::vector<FqPoly> out;
  for (int d = 1; d <= deg; ++d) {
    u64 total = 1;
    for (int i = 0; i < d; ++i) total *= q;
    for (u64 idx = 0; idx < total; ++idx) out.push_back(FqPoly::from_monic_index(q, d, idx));
  }
  return out;
}

Outcome criterion_2() {
  Outcome o;
  Stopwatch sw;
  double worst = 0;
  std::size_t characters = 0, moduli = 0;
  for (u64 q : {2, 3, 5}) {
    const auto mods = monic_up_to(q, 3);
    const auto pc = place_census(q, 12, mods);
    for (std::size_t slot = 0; slot < mods.size(); ++slot) {
      ++moduli;
      for (const auto& chi : FFCharacterGroup(mods[slot]).characters()) {
        worst = std::max(worst, trace_formula_check(chi, 12, pc, slot).max_residual);
        ++characters;
      }
    }
  }
  o.check(worst < 1e-8, std::to_string(characters) + " characters mod " + std::to_string(moduli) + " moduli, max residual " +
                            fmt("%.3e", worst));
  const double t = sw.seconds();
  o.check(t < 30, "runtime " + fmt("%.1f", t) + " s");
  return o;
}

Outcome criterion_3() {
  Outcome o;
  for (u64 q : {2, 3}) {
    const auto triv = ff_mertens_trivial(q, 14);
    double worst = 0;
    for (int D = 11; D <= 14; ++D) worst = std::max(worst, std::abs(triv.ratios[D - 1] - triv.ratios[D - 2]));
    o.check(worst < 0.05, "q=" + std::to_string(q) + " trivial: max step over D in [10,14] = " + fmt("%.3e", worst));
  }
  const FqPoly A = FqPoly::parse(3, "1,0,1");
  const auto pc = place_census(3, 14, {A}, 1);
  const auto chi = FFCharacterGroup(A).character(1);
  const auto s = ff_mertens(chi, 14, pc, 0);
  double worst = 0;
  for (int D = 11; D <= 14; ++D) {
    const cplx a(s.values[D - 1], s.imag_values[D - 1]), b(s.values[D - 2], s.imag_values[D - 2]);
    worst = std::max(worst, std::abs(a - b));
  }
  o.check(worst < 0.05, "order-8 character: max step over D in [10,14] = " + fmt("%.3e", worst));
  return o;
}

Outcome criterion_4() {
  Outcome o;
  for (u64 q : {2, 3, 5}) {
    std::vector<u64> count(11, 0);
    for_each_irreducible(q, 10, [&](int n, u64) { ++count[n]; });
    bool same = true;
    for (int n = 1; n <= 10; ++n) same = same && count[n] == gauss_irreducible_count(q, static_cast<u64>(n));
    o.check(same, "q=" + std::to_string(q) + " n<=10 (deg 10: " + std::to_string(count[10]) + ")");
  }
  return o;
}

Outcome criterion_5() {
  Outcome o;
  Stopwatch sw;
  const auto s = summatory(primes_1e8(), 1e8);
  const double gap = std::abs(s.mertens - std::log(std::log(1e8)) - 0.2615);
  o.check(gap < 1e-2, "|sum 1/p - loglog x - 0.2615| = " + fmt("%.3e", gap));
  const double t = sw.seconds();
  o.check(t < 60, "sieve + sum " + fmt("%.1f", t) + " s");
  return o;
}

Outcome criterion_6() {
  Outcome o;
  const auto chi = character_by_index(4, 1);
  const cplx L1 = l_value(chi, 1.0);
  o.check(std::abs(L1 - kPi / 4) < 1e-12, "L(1) = " + fmt("%.15f", L1.real()));
  const std::vector<double> xs{1e4, 1e5, 1e6, 1e7, 1e8};
  const auto tr = partial_product_trace(spec_from_label("dirichlet:q=4:idx=1"), 1.0, primes_1e8(), xs);
  std::vector<double> dev;
  for (const auto& v : tr.normalized) dev.push_back(std::abs(v / L1 - 1.0));
  o.check(dev.back() < 0.01, "relative deviation at 1e8 = " + fmt("%.3e", dev.back()));
  int shrinking = 0;
  for (std::size_t i = 1; i < dev.size(); ++i) shrinking += dev[i] < dev[i - 1];
  o.check(shrinking >= 3, std::to_string(shrinking) + " of 4 decade steps shrink");
  return o;
}

Outcome criterion_7() {
  Outcome o;
  const auto chi = character_by_index(4, 1);
  const auto spec = spec_from_label("dirichlet:q=4:idx=1");
  const auto xs = default_checkpoints(1e8, 64);
  const auto rep = drh_normalize(partial_product_trace(spec, 0.5, primes_1e8(), xs), 0, nu_exponent(chi), l_value(chi, 0.5));
  o.check(rep.nu == 1, "nu = " + std::to_string(rep.nu));
  const auto st = deviation_stats(xs, rep.deviations, 1e6, 1e8);
  o.check(st.log_avg_dev < 0.15, "log-averaged deviation over [1e6,1e8] = " + fmt("%.3e", st.log_avg_dev) + " (" +
                                     std::to_string(st.points) + " checkpoints)");
  double worst = 0;
  for (const auto& r : log_identity_check(chi, 0.5, primes_1e8(), xs)) worst = std::max(worst, r.residual());
  o.check(worst < 1e-10, "log identity max residual " + fmt("%.3e", worst));
  return o;
}

std::vector<i128> naive_tau(std::size_t N) {
  std::vector<i128> c(N, 0);
  c[0] = 1;
  for (std::size_t n = 1; n < N; ++n)
    for (int rep = 0; rep < 24; ++rep)
      for (std::size_t i = N; i-- > n;) c[i] -= c[i - n];
  return c;
}

Outcome criterion_8() {
  Outcome o;
  o.check(tau_table(2000).values() == naive_tau(2000), "tau(n), n <= 2000, equals naive expansion");

  const auto t = tau_table(1000000);
  const auto sigma = sigma11_mod(100000, 691);
  bool congruent = true;
  for (std::size_t n = 1; n <= 100000; ++n) congruent = congruent && static_cast<u64>(((t(n) % 691) + 691) % 691) == sigma[n];
  o.check(congruent, "tau = sigma_11 mod 691 for n <= 1e5");

  const auto P = sieve_primes(1000000);
  double worst = 0;
  for (std::size_t i = 0; i < P.count_upto(1e5); ++i) worst = std::max(worst, std::abs(tau_normalized(t, P[i])));
  o.check(worst <= 2.0, "Deligne: max |tau(p)| / p^{11/2} = " + fmt("%.6f", worst));

  std::mt19937_64 rng(12345);
  bool ntt_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    IntSeries a, b;
    const i64 span = trial % 2 ? (i64{1} << 40) : 1000;
    for (int i = 0; i < 512; ++i) {
      a.coeffs.push_back(static_cast<i128>(static_cast<i64>(rng() % (2 * span + 1)) - span));
      b.coeffs.push_back(static_cast<i128>(static_cast<i64>(rng() % (2 * span + 1)) - span));
    }
    ntt_ok = ntt_ok && ntt_convolve(a, b, 1023) == schoolbook_convolve(a, b, 1023);
  }
  o.check(ntt_ok, "NTT equals schoolbook on 100 random length-512 pairs");

  const auto xs = default_checkpoints(1e6, 64);
  auto s = tau_bias_series(t, P, xs);
  loglog_fit(s);
  o.check(s.fit->slope >= 0.2 && s.fit->slope <= 0.8, "bias slope C = " + fmt("%.4f", s.fit->slope));

  std::ifstream in(data_file("tau_bias_1e6.csv"));
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  double drift = 0;
  while (std::getline(in, line) && rows < xs.size()) {
    std::stringstream ss(line);
    std::string x, v;
    std::getline(ss, x, ',');
    std::getline(ss, v, ',');
    drift = std::max(drift, std::abs(std::stod(x) - xs[rows]) + std::abs(std::stod(v) - s.values[rows]));
    ++rows;
  }
  o.check(rows == 64 && drift < 1e-12, "golden series drift " + fmt("%.1e", drift));
  return o;
}

i64 brute_ap(i64 a, i64 b, u64 p, bool bad) {
  const i64 Pp = static_cast<i64>(p);
  const i64 A = mod_floor(a, Pp), B = mod_floor(b, Pp);
  i64 count = 0;
  for (i64 x = 0; x < Pp; ++x)
    for (i64 y = 0; y < Pp; ++y) {
      if (mod_floor(y * y - x * x * x - A * x - B, Pp) != 0) continue;
      const bool singular = mod_floor(3 * x * x + A, Pp) == 0 && mod_floor(2 * y, Pp) == 0;
      if (!singular) ++count;
    }
  return bad ? Pp - (count + 1) : Pp + 1 - (count + 1);
}

Outcome criterion_9() {
  Outcome o;
  const auto small = sieve_primes(200);
  std::mt19937_64 rng(2024);
  int curves = 0, mismatches = 0;
  while (curves < 10) {
    const i64 a = static_cast<i64>(rng() % 201) - 100, b = static_cast<i64>(rng() % 201) - 100;
    if (4 * a * a * a + 27 * b * b == 0) continue;
    const EllipticCurve E(a, b);
    ++curves;
    for (u64 p : small.primes()) mismatches += count_points_ap(E, p) != brute_ap(a, b, p, E.is_bad(p));
  }
  o.check(mismatches == 0, "a_p vs brute force, 10 curves, p < 200: " + std::to_string(mismatches) + " mismatches");

  const auto primes = sieve_primes(100000);
  const auto xs = default_checkpoints(1e5, 64);
  bool hasse = true;
  double split = 0;
  for (auto [a, b] : {std::pair<i64, i64>{-1, 0}, {-16, 16}, {1, 1}, {-7, 10}}) {
    const EllipticCurve E(a, b);
    const auto t = compute_ap_table(E, primes, 100000);
    for (std::size_t i = 0; i < t.primes.size(); ++i)
      if (!E.is_bad(t.primes[i])) hasse = hasse && static_cast<double>(t.ap[i]) * t.ap[i] <= 4.0 * static_cast<double>(t.primes[i]);
    const auto tr = bsd_product_trace(E, t, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) split = std::max(split, std::abs(bsd_log_product_split(E, t, xs[i]) - tr.log_values[i].real()));
  }
  o.check(hasse, "Hasse bound for p <= 1e5 on 4 curves");
  o.check(split < 1e-12, "product forms differ by " + fmt("%.1e", split));

  const auto r0 = rank_fit(bsd_product_trace(EllipticCurve(-1, 0), primes, xs));
  const auto r1 = rank_fit(bsd_product_trace(EllipticCurve(-16, 16), primes, xs));
  o.check(r0.r_hat < r1.r_hat, "r_hat(-1,0) = " + fmt("%.3f", r0.r_hat) + " < r_hat(-16,16) = " + fmt("%.3f", r1.r_hat));
  return o;
}

Outcome criterion_10() {
  Outcome o;
  const auto& P = primes_1e8();
  const double d1 = classical_race_density(P, 20000), d2 = classical_race_density(P, 1000000);
  o.check(d1 == 1.0, "density to 2e4 = " + fmt("%.6f", d1));
  o.check(d2 > 0.9, "density to 1e6 = " + fmt("%.6f", d2));
  auto s = race_series(4, 1, 3, 0.5, P, default_checkpoints(1e8, 64));
  loglog_fit(s);
  o.check(s.fit->slope >= 0.25 && s.fit->slope <= 0.75, "race slope C at 1e8 = " + fmt("%.4f", s.fit->slope));
  return o;
}

struct CliRun {
  int code = 0;
  std::string out, err;
  std::map<std::string, std::string> files;  // relative path -> bytes
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

CliRun run_cli(std::vector<std::string> args, const fs::path& dir) {
  std::vector<const char*> argv{"drh"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) r.files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return r;
}

Outcome criterion_11() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / ("drh-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
      {"sieve", {"sieve", "--limit", "2e6"}},
      {"product", {"product", "--spec", "dirichlet:q=5:idx=1", "--s", "0.5+3i", "--limit", "2e6"}},
      {"drh-verify", {"drh-verify", "--spec", "dirichlet:q=4:idx=1", "--limit", "2e6"}},
      {"race", {"race", "--q", "4", "--a", "1", "--b", "3", "--limit", "2e6"}},
      {"tau-bias", {"tau-bias", "--limit", "1e5"}},
      {"bsd", {"bsd", "--a", "-16", "--b", "16", "--limit", "1e5", "--expect-rank", "1"}},
      {"ff-verify", {"ff-verify", "--q", "3", "--modulus", "1,0,1", "--char", "1", "--dmax", "12"}},
      {"ff-trace", {"ff-trace", "--q", "5", "--modulus", "2,1,0,1", "--char", "3", "--lmax", "12"}},
  };
  std::vector<std::string> report_inputs;
  for (const auto& [name, base] : cases) report_inputs.push_back((root / "inputs" / (name + ".json")).string());
  fs::create_directories(root / "inputs");

  std::size_t compared = 0;
  auto compare = [&](const std::string& name, std::vector<std::string> base) {
    std::optional<CliRun> first;
    bool same = true;
    for (int threads : {1, 4, 8}) {
      const fs::path dir = root / (name + "-" + std::to_string(threads));
      fs::create_directories(dir);
      auto args = base;
      for (const char* opt : {"--out", "--json"}) {
        args.push_back(opt);
        args.push_back((dir / (std::string(opt + 2) == "out" ? "result.csv" : "result.json")).string());
      }
      args.insert(args.end(), {"--threads", std::to_string(threads), "--cache-dir", (dir / "cache").string()});
      auto r = run_cli(args, dir);
      if (r.code == cli::kExitError) {
        o.check(false, name + ": " + r.err);
        return;
      }
      if (!first) {
        first = r;
        if (r.files.count("result.json")) std::ofstream(root / "inputs" / (name + ".json"), std::ios::binary) << r.files["result.json"];
      } else {
        same = same && r.code == first->code && r.out == first->out && r.err == first->err && r.files == first->files;
      }
    }
    compared += first->files.size() + 1;
    if (!same) o.check(false, name + " differs across thread counts");
  };
  for (const auto& [name, base] : cases) compare(name, base);
  std::vector<std::string> rep{"report"};
  for (const auto& p : report_inputs) rep.insert(rep.end(), {"--in", p});
  compare("report", rep);
  o.check(o.pass, "9 commands x threads {1,4,8}: " + std::to_string(compared) + " outputs and caches compared byte for byte");
  fs::remove_all(root);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion_1, criterion_2, criterion_3, criterion_4,  criterion_5, criterion_6,
                                                       criterion_7, criterion_8, criterion_9, criterion_10, criterion_11};
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      const int n = std::atoi(argv[++i]);
      if (n < 1 || n > static_cast<int>(criteria.size())) {
        std::fprintf(stderr, "acceptance: no criterion %d\n", n);
        return 1;
      }
      selected.push_back(static_cast<std::size_t>(n));
    } else {
      std::fprintf(stderr, "usage: acceptance [--only N]...\n");
      return 1;
    }
  }
  if (selected.empty())
    for (std::size_t n = 1; n <= criteria.size(); ++n) selected.push_back(n);

  bool all = true;
  for (std::size_t n : selected) {
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    all = all && o.pass;
    std::printf("criterion %zu: %s  %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
