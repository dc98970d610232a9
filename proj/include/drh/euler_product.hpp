#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "drh/dirichlet.hpp"
#include "drh/lfunction.hpp"
#include "drh/primes.hpp"
#include "drh/series.hpp"

namespace drh {

inline constexpr std::size_t kPrimeBlock = std::size_t{1} << 16;

// Default checkpoint grid: 64 geometric points from 10^3 to the limit.
inline std::vector<double> default_checkpoints(double limit, std::size_t count = 64) {
  return geometric_checkpoints(std::min(1e3, limit), limit, count);
}

namespace detail {

inline void check_checkpoints(const std::vector<double>& xs, const PrimeTable& primes, const char* who) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] > static_cast<double>(primes.limit()))
      throw RangeError(std::string(who) + ": checkpoint exceeds prime table limit");
    if (i && !(xs[i] > xs[i - 1])) throw ArgumentError(std::string(who) + ": checkpoints must strictly ascend");
  }
}

// Runs term(p, block) over the primes <= checkpoints.back() in fixed blocks and
// returns the compensated prefix sum at every checkpoint. Blocks are summed
// independently and combined in index order, so the result does not depend
// on the number of threads.
template <class Term>
std::vector<cplx> blocked_prefix_sums(const PrimeTable& primes, const std::vector<double>& checkpoints, unsigned threads,
                                      Term&& term) {
  std::vector<cplx> out(checkpoints.size(), 0.0);
  if (checkpoints.empty()) return out;
  const std::size_t n = primes.count_upto(checkpoints.back());
  const std::size_t nblocks = (n + kPrimeBlock - 1) / kPrimeBlock;

  // Index (into primes) one past the last prime <= each checkpoint.
  std::vector<std::size_t> cut(checkpoints.size());
  for (std::size_t i = 0; i < checkpoints.size(); ++i) cut[i] = primes.count_upto(checkpoints[i]);

  struct Snap {
    std::size_t checkpoint;
    ComplexKahanSum partial;
  };
  std::vector<ComplexKahanSum> totals(nblocks);
  std::vector<std::vector<Snap>> snaps(nblocks);

  parallel_blocks(nblocks, threads, [&](std::size_t b) {
    const std::size_t lo = b * kPrimeBlock, hi = std::min(n, lo + kPrimeBlock);
    std::size_t c = static_cast<std::size_t>(std::lower_bound(cut.begin(), cut.end(), lo + 1) - cut.begin());
    ComplexKahanSum acc;
    for (std::size_t i = lo; i < hi; ++i) {
      acc.add(term(primes[i], b));
      while (c < cut.size() && cut[c] == i + 1) snaps[b].push_back({c++, acc});
    }
    totals[b] = acc;
  });

  ComplexKahanSum running;
  std::size_t next = 0;
  // checkpoints before the first prime
  while (next < cut.size() && cut[next] == 0) out[next++] = 0.0;
  for (std::size_t b = 0; b < nblocks; ++b) {
    for (const auto& s : snaps[b]) {
      ComplexKahanSum v = running;
      v.merge(s.partial);
      out[s.checkpoint] = v.value();
      next = s.checkpoint + 1;
    }
    running.merge(totals[b]);
  }
  for (; next < out.size(); ++next) out[next] = running.value();
  return out;
}

}  // namespace detail

// log prod_{p <= x} prod_j (1 - alpha_j(p) p^{-s})^{-1} at each checkpoint,
// with s already in the unitary normalization.
inline ProductTrace partial_product_trace(const LFunctionSpec& spec, cplx s, const PrimeTable& primes,
                                          const std::vector<double>& checkpoints, unsigned threads = default_threads()) {
  if (!(s.real() >= 0.5)) throw DomainError("partial_product_trace: need Re(s) >= 1/2");
  detail::check_checkpoints(checkpoints, primes, "partial_product_trace");
  ProductTrace tr;
  tr.spec_label = spec.label;
  tr.s = s;
  tr.checkpoints = checkpoints;
  const std::size_t nblocks = (primes.count_upto(checkpoints.empty() ? 0 : checkpoints.back()) + kPrimeBlock - 1) / kPrimeBlock;
  std::vector<double> block_max(std::max<std::size_t>(nblocks, 1), 0.0);
  tr.log_values = detail::blocked_prefix_sums(primes, checkpoints, threads, [&](u64 p, std::size_t b) {
    cplx a[kMaxDegree];
    const int n = spec.satake(p, a);
    const cplx ps = std::exp(-s * std::log(static_cast<double>(p)));
    cplx sum = 0.0;
    double& bm = block_max[b];
    for (int j = 0; j < n; ++j) {
      const cplx w = a[j] * ps;
      const double m = std::abs(w);
      if (!(m < 1.0)) throw IntegrityError("partial_product_trace: |alpha p^-s| >= 1 at p = " + std::to_string(p));
      bm = std::max(bm, m);
      sum -= log1p_complex(-w);
    }
    return sum;
  });
  for (double m : block_max) tr.max_branch_modulus = std::max(tr.max_branch_modulus, m);
  tr.normalized.reserve(tr.log_values.size());
  for (const auto& l : tr.log_values) tr.normalized.push_back(std::exp(l));
  return tr;
}

struct ConvergenceReport {
  ProductTrace trace;
  int r = 0;
  int nu = 0;
  cplx l_target{0, 0};
  cplx target{0, 0};
  std::vector<double> deviations;  // |normalized / target - 1| per checkpoint
  double tail_max_dev = 0;
  double log_avg_dev = 0;
  std::optional<double> tolerance;
  std::optional<bool> pass;
};

// Max and dx/x-weighted mean of the deviations over checkpoints in [lo, hi].
struct DeviationStats {
  double max_dev = 0;
  double log_avg_dev = 0;
  std::size_t points = 0;
};

inline DeviationStats deviation_stats(const std::vector<double>& xs, const std::vector<double>& dev, double lo, double hi) {
  DeviationStats st;
  std::vector<double> t, d;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < lo || xs[i] > hi) continue;
    t.push_back(std::log(xs[i]));
    d.push_back(dev[i]);
    st.max_dev = std::max(st.max_dev, dev[i]);
  }
  st.points = t.size();
  if (t.empty()) return st;
  if (t.size() == 1) {
    st.log_avg_dev = d[0];
    return st;
  }
  KahanSum area;
  for (std::size_t i = 1; i < t.size(); ++i) area.add(0.5 * (d[i] + d[i - 1]) * (t[i] - t[i - 1]));
  st.log_avg_dev = area.value() / (t.back() - t.front());
  return st;
}

// normalized = exp(log P + r log log x); target = sqrt(2)^nu L^(r) / (e^{r gamma} r!).
inline ConvergenceReport drh_normalize(ProductTrace trace, int r, int nu, cplx l_target) {
  if (r < 0) throw ArgumentError("drh_normalize: r must be >= 0");
  if (std::abs(l_target) == 0.0)
    throw InconsistencyError("drh_normalize: target derivative vanishes; the vanishing order must be larger");
  ConvergenceReport rep;
  rep.r = r;
  rep.nu = nu;
  rep.l_target = l_target;
  double fact = 1;
  for (int i = 2; i <= r; ++i) fact *= i;
  rep.target = std::pow(std::sqrt(2.0), nu) * l_target / (std::exp(r * kEulerGamma) * fact);
  trace.normalized.clear();
  for (std::size_t i = 0; i < trace.checkpoints.size(); ++i) {
    const double x = trace.checkpoints[i];
    cplx lv = trace.log_values[i];
    cplx v;
    if (r == 0)
      v = std::exp(lv);
    else if (x > 1)
      v = std::exp(lv + static_cast<double>(r) * std::log(std::log(x)));
    else
      v = 0.0;
    trace.normalized.push_back(v);
    rep.deviations.push_back(std::abs(v / rep.target - 1.0));
  }
  trace.predicted_limit = rep.target;
  const std::size_t n = trace.checkpoints.size();
  if (n) {
    const auto st = deviation_stats(trace.checkpoints, rep.deviations, trace.checkpoints[tail_start(n)], trace.checkpoints.back());
    rep.tail_max_dev = st.max_dev;
    rep.log_avg_dev = st.log_avg_dev;
  }
  rep.trace = std::move(trace);
  return rep;
}

// theta(x, chi) = sum_{p <= x} chi(p) log p, with theta / (sqrt(x) log x).
inline BiasSeries drh_equivalent_sum(const DirichletCharacter& chi, const PrimeTable& primes, const std::vector<double>& checkpoints,
                                     unsigned threads = default_threads()) {
  detail::check_checkpoints(checkpoints, primes, "drh_equivalent_sum");
  BiasSeries out;
  out.label = "theta_chi:q=" + std::to_string(chi.modulus());
  out.weight = 0;
  out.checkpoints = checkpoints;
  const auto v = detail::blocked_prefix_sums(primes, checkpoints, threads,
                                             [&](u64 p, std::size_t) { return chi(p) * std::log(static_cast<double>(p)); });
  const bool real = chi.order() <= 2;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.values.push_back(v[i].real());
    if (!real) out.imag_values.push_back(v[i].imag());
    const double x = checkpoints[i];
    out.ratios.push_back(x > 1 ? v[i].real() / (std::sqrt(x) * std::log(x)) : 0.0);
  }
  return out;
}

struct LogIdentity {
  cplx lhs{0, 0};     // sum_p -log(1 - chi(p) p^{-s})
  cplx k1_sum{0, 0};  // sum_p chi(p) p^{-s}
  cplx k2_sum{0, 0};  // sum_p chi(p)^2 p^{-2s} / 2
  cplx k_tail{0, 0};  // sum_p sum_{k >= 3} chi(p)^k p^{-ks} / k
  double residual() const { return std::abs(lhs - (k1_sum + k2_sum + k_tail)); }
};

// The k >= 3 part of -log(1 - z), summed as its own series.
inline cplx log_series_tail(cplx z) {
  cplx zk = z * z * z;
  ComplexKahanSum acc;
  for (int k = 3; k < 400; ++k) {
    const cplx t = zk / static_cast<double>(k);
    acc.add(t);
    if (std::abs(t) < 1e-18 * std::max(1e-300, std::abs(acc.value()))) break;
    zk *= z;
  }
  return acc.value();
}

inline std::vector<LogIdentity> log_identity_check(const DirichletCharacter& chi, cplx s, const PrimeTable& primes,
                                                   const std::vector<double>& checkpoints) {
  detail::check_checkpoints(checkpoints, primes, "log_identity_check");
  std::vector<LogIdentity> out;
  ComplexKahanSum lhs, k1, k2, tail;
  std::size_t j = 0;
  for (double x : checkpoints) {
    for (; j < primes.size() && static_cast<double>(primes[j]) <= x; ++j) {
      const u64 p = primes[j];
      const cplx c = chi(p);
      if (c == cplx{0, 0}) continue;
      const cplx z = c * std::exp(-s * std::log(static_cast<double>(p)));
      lhs.add(-log1p_complex(-z));
      k1.add(z);
      k2.add(z * z / 2.0);
      tail.add(log_series_tail(z));
    }
    out.push_back({lhs.value(), k1.value(), k2.value(), tail.value()});
  }
  return out;
}

// lim_{eps -> 0} [ int_{1+eps}^x du / (u^{s0} log u) - log(1/eps) ]
//   = log log x + int_0^{log x} (e^{(1 - s0) t} - 1) / t dt.
inline cplx pole_compensator(double x, cplx s0) {
  if (!(x > 1)) throw DomainError("pole_compensator: x must exceed 1");
  const double L = std::log(x);
  const cplx c = 1.0 - s0;
  auto g = [c](double t) -> cplx {
    const cplx w = c * t;
    if (std::abs(w) < 1e-6) return c * (1.0 + w / 2.0 + w * w / 6.0);
    return (std::exp(w) - 1.0) / t;
  };
  using boost::math::quadrature::gauss_kronrod;
  const double re = gauss_kronrod<double, 61>::integrate([&](double t) { return g(t).real(); }, 0.0, L, 15, 1e-14);
  const double im = gauss_kronrod<double, 61>::integrate([&](double t) { return g(t).imag(); }, 0.0, L, 15, 1e-14);
  return std::log(L) + cplx{re, im};
}

// Raw data for zeta in the critical strip, where no verdict is issued.
struct PoleCaseSample {
  double x = 0;
  cplx log_product{0, 0};
  cplx compensator{0, 0};
  cplx ratio{0, 0};  // (log x)^m zeta_x(s0) / exp(compensator)
  double psi_minus_x = 0;
  double theta_minus_x = 0;
};

inline std::vector<PoleCaseSample> zeta_pole_case(cplx s0, int m, const PrimeTable& primes, const std::vector<double>& checkpoints,
                                                  unsigned threads = default_threads()) {
  const auto tr = partial_product_trace(zeta_spec(), s0, primes, checkpoints, threads);
  std::vector<PoleCaseSample> out;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const double x = checkpoints[i];
    PoleCaseSample smp;
    smp.x = x;
    smp.log_product = tr.log_values[i];
    smp.compensator = pole_compensator(x, s0);
    smp.ratio = std::exp(tr.log_values[i] - smp.compensator + static_cast<double>(m) * std::log(std::log(x)));
    const auto sm = summatory(primes, x);
    smp.psi_minus_x = sm.psi - x;
    smp.theta_minus_x = sm.theta - x;
    out.push_back(smp);
  }
  return out;
}

}  // namespace drh
