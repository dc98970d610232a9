#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "drh/core.hpp"
#include "drh/primes.hpp"
#include "drh/series.hpp"

namespace drh {

// y^2 = x^3 + a x + b over Q, taken as given (no minimization).
class EllipticCurve {
 public:
  EllipticCurve(i64 a, i64 b) : a_(a), b_(b) {
    const i128 A = a, B = b;
    disc_ = -16 * (4 * A * A * A + 27 * B * B);
    if (disc_ == 0) throw ArgumentError("singular curve: discriminant is zero");
    i128 d = disc_ < 0 ? -disc_ : disc_;
    for (u64 p = 2; static_cast<i128>(p) * p <= d; ++p) {
      if (d % p) continue;
      bad_.push_back(p);
      while (d % p == 0) d /= p;
    }
    if (d > 1) bad_.push_back(static_cast<u64>(d));
  }

  i64 a() const noexcept { return a_; }
  i64 b() const noexcept { return b_; }
  i128 disc() const noexcept { return disc_; }
  const std::vector<u64>& bad_primes() const noexcept { return bad_; }
  bool is_bad(u64 p) const { return disc_ % static_cast<i128>(p) == 0; }

  // Primes with p^12 | disc: the model may be non-minimal there and the
  // nonsingular-count convention can disagree with the minimal model's a_p.
  std::vector<u64> possibly_nonminimal_primes() const {
    std::vector<u64> out;
    for (u64 p : bad_) {
      i128 d = disc_ < 0 ? -disc_ : disc_;
      int e = 0;
      while (d % p == 0) {
        d /= p;
        ++e;
      }
      if (e >= 12) out.push_back(p);
    }
    return out;
  }

  std::string label() const { return "ec:a=" + std::to_string(a_) + ":b=" + std::to_string(b_); }

 private:
  i64 a_, b_;
  i128 disc_;
  std::vector<u64> bad_;
};

namespace detail {

// Number of affine solutions of y^2 = f(x) mod p, and of singular points.
struct AffineCount {
  u64 points = 0;
  u64 singular = 0;
};

inline AffineCount affine_count(const EllipticCurve& E, u64 p, bool need_singular) {
  AffineCount c;
  const u64 A = static_cast<u64>(mod_floor(E.a(), static_cast<i64>(p)));
  const u64 B = static_cast<u64>(mod_floor(E.b(), static_cast<i64>(p)));
  if (p == 2) {
    for (u64 x = 0; x < 2; ++x)
      for (u64 y = 0; y < 2; ++y) {
        const u64 f = (x * x * x + A * x + B) % 2;
        if ((y * y) % 2 != f) continue;
        ++c.points;
        // partials: 2y = 0 always; 3x^2 + a
        if (need_singular && (3 * x * x + A) % 2 == 0) ++c.singular;
      }
    return c;
  }
  // Quadratic-residue bitmap: sq[n] = number of y with y^2 = n.
  std::vector<std::uint8_t> sq(p, 0);
  for (u64 y = 1; y <= p / 2; ++y) sq[y * y % p] = 2;
  sq[0] = 1;
  // f(x) by finite differences: f(x+1) - f(x) = 3x^2 + 3x + 1 + a.
  u64 f = B;
  u64 d1 = (1 + A) % p;  // f(1) - f(0)
  u64 d2 = 6 % p;        // second difference at x = 0: 6x + 6
  const u64 six = 6 % p;
  for (u64 x = 0; x < p; ++x) {
    c.points += sq[f];
    if (need_singular && f == 0 && (3 * (x * x % p) + A) % p == 0) ++c.singular;
    f += d1;
    if (f >= p) f -= p;
    d1 += d2;
    if (d1 >= p) d1 -= p;
    d2 += six;
    if (d2 >= p) d2 -= p;
  }
  return c;
}

}  // namespace detail

// Number of nonsingular points of the reduction, including infinity.
inline u64 nonsingular_count(const EllipticCurve& E, u64 p) {
  const bool bad = E.is_bad(p);
  const auto c = detail::affine_count(E, p, bad);
  return c.points - c.singular + 1;
}

// a_p = p + 1 - #E(F_p) at good p, p - #E^ns(F_p) at bad p.
inline i64 count_points_ap(const EllipticCurve& E, u64 p) {
  if (p < 2) throw ArgumentError("count_points_ap: p must be >= 2");
  const u64 n = nonsingular_count(E, p);
  return E.is_bad(p) ? static_cast<i64>(p) - static_cast<i64>(n) : static_cast<i64>(p) + 1 - static_cast<i64>(n);
}

// a_p for every prime of a table, in prime order.
struct ApTable {
  i64 a = 0, b = 0;
  u64 limit = 0;
  std::vector<u64> primes;
  std::vector<std::int32_t> ap;

  friend bool operator==(const ApTable&, const ApTable&) = default;
};

inline ApTable compute_ap_table(const EllipticCurve& E, const PrimeTable& primes, u64 limit,
                                unsigned threads = default_threads()) {
  if (limit > primes.limit()) throw RangeError("compute_ap_table: limit exceeds prime table");
  ApTable t{E.a(), E.b(), limit, {}, {}};
  const std::size_t n = primes.count_upto(static_cast<double>(limit));
  t.primes.assign(primes.primes().begin(), primes.primes().begin() + static_cast<std::ptrdiff_t>(n));
  t.ap.assign(n, 0);
  constexpr std::size_t kBlock = 256;
  parallel_blocks((n + kBlock - 1) / kBlock, threads, [&](std::size_t blk) {
    for (std::size_t i = blk * kBlock; i < std::min(n, (blk + 1) * kBlock); ++i)
      t.ap[i] = static_cast<std::int32_t>(count_points_ap(E, t.primes[i]));
  });
  return t;
}

// log Prod(x, E) = sum_{p <= x} log(p / #E^ns(F_p)).
inline ProductTrace bsd_product_trace(const EllipticCurve& E, const ApTable& ap, const std::vector<double>& checkpoints) {
  ProductTrace tr;
  tr.spec_label = E.label();
  tr.s = {0.5, 0.0};
  tr.checkpoints = checkpoints;
  if (checkpoints.empty()) return tr;
  if (checkpoints.back() > static_cast<double>(ap.limit)) throw RangeError("bsd_product_trace: checkpoint exceeds a_p table");
  KahanSum acc;
  std::size_t j = 0;
  for (double x : checkpoints) {
    for (; j < ap.primes.size() && static_cast<double>(ap.primes[j]) <= x; ++j) {
      const u64 p = ap.primes[j];
      const i64 ens = (E.is_bad(p) ? static_cast<i64>(p) : static_cast<i64>(p) + 1) - ap.ap[j];
      acc.add(std::log(static_cast<double>(p)) - std::log(static_cast<double>(ens)));
    }
    tr.log_values.push_back({acc.value(), 0.0});
    tr.normalized.push_back(std::exp(cplx{acc.value(), 0.0}));
  }
  return tr;
}

inline ProductTrace bsd_product_trace(const EllipticCurve& E, const PrimeTable& primes, const std::vector<double>& checkpoints,
                                      unsigned threads = default_threads()) {
  if (checkpoints.empty()) return bsd_product_trace(E, ApTable{E.a(), E.b(), 0, {}, {}}, checkpoints);
  if (checkpoints.back() > static_cast<double>(primes.limit())) throw RangeError("bsd_product_trace: checkpoint exceeds prime table");
  const auto ap = compute_ap_table(E, primes, static_cast<u64>(std::max(2.0, checkpoints.back())), threads);
  return bsd_product_trace(E, ap, checkpoints);
}

// The split form: bad p contribute 1/(1 - a_p/p), good p 1/(1 - a_p/p + 1/p).
inline double bsd_log_product_split(const EllipticCurve& E, const ApTable& ap, double x) {
  KahanSum acc;
  for (std::size_t j = 0; j < ap.primes.size() && static_cast<double>(ap.primes[j]) <= x; ++j) {
    const double p = static_cast<double>(ap.primes[j]);
    const double a = ap.ap[j];
    acc.add(E.is_bad(ap.primes[j]) ? -std::log1p(-a / p) : -std::log1p(-a / p + 1.0 / p));
  }
  return acc.value();
}

struct RankFit {
  double r_hat = 0;
  double logC_hat = 0;
  double residual = 0;
};

// log Prod(x) ~ r * (-log log x) + log C on the tail half of the checkpoints.
inline RankFit rank_fit(const ProductTrace& trace) {
  detail::require_fit_window(trace.checkpoints, "rank_fit", true);
  std::vector<double> t, y;
  for (std::size_t i = tail_start(trace.checkpoints.size()); i < trace.checkpoints.size(); ++i) {
    t.push_back(-std::log(std::log(trace.checkpoints[i])));
    y.push_back(trace.log_values[i].real());
  }
  const auto f = least_squares(t, y);
  return {f.slope, f.intercept, f.residual};
}

}  // namespace drh
