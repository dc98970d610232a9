#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "drh/euler_product.hpp"
#include "drh/primes.hpp"
#include "drh/series.hpp"

namespace drh {

// pi_s(x; q, a) = sum_{p <= x, p = a mod q} p^{-s}.
inline BiasSeries weighted_pi(u64 q, u64 a, double s, const PrimeTable& primes, const std::vector<double>& checkpoints,
                              unsigned threads = default_threads()) {
  if (q == 0) throw ArgumentError("weighted_pi: q must be >= 1");
  if (gcd64(a % q, q) != 1) throw ArgumentError("weighted_pi: gcd(a, q) must be 1");
  if (!(s >= 0)) throw ArgumentError("weighted_pi: weight must be >= 0");
  detail::check_checkpoints(checkpoints, primes, "weighted_pi");
  BiasSeries out;
  out.label = "pi_s:q=" + std::to_string(q) + ":a=" + std::to_string(a % q);
  out.weight = s;
  out.checkpoints = checkpoints;
  const u64 r = a % q;
  const auto v = detail::blocked_prefix_sums(primes, checkpoints, threads, [&](u64 p, std::size_t) -> cplx {
    if (p % q != r) return 0.0;
    return s == 0 ? 1.0 : std::exp(-s * std::log(static_cast<double>(p)));
  });
  for (const auto& z : v) out.values.push_back(z.real());
  return out;
}

// pi_s(x; q, b) - pi_s(x; q, a).
inline BiasSeries race_series(u64 q, u64 a, u64 b, double s, const PrimeTable& primes, const std::vector<double>& checkpoints,
                              unsigned threads = default_threads()) {
  if (q == 0) throw ArgumentError("race_series: q must be >= 1");
  if (gcd64(a % q, q) != 1 || gcd64(b % q, q) != 1) throw ArgumentError("race_series: residues must be coprime to q");
  if (a % q == b % q) throw ArgumentError("race_series: a and b must differ mod q");
  if (!(s >= 0)) throw ArgumentError("race_series: weight must be >= 0");
  detail::check_checkpoints(checkpoints, primes, "race_series");
  BiasSeries out;
  out.label = "race:q=" + std::to_string(q) + ":b=" + std::to_string(b % q) + ":a=" + std::to_string(a % q);
  out.weight = s;
  out.checkpoints = checkpoints;
  const u64 ra = a % q, rb = b % q;
  const auto v = detail::blocked_prefix_sums(primes, checkpoints, threads, [&](u64 p, std::size_t) -> cplx {
    const u64 r = p % q;
    const double sign = r == rb ? 1.0 : (r == ra ? -1.0 : 0.0);
    if (sign == 0) return 0.0;
    return sign * (s == 0 ? 1.0 : std::exp(-s * std::log(static_cast<double>(p))));
  });
  for (const auto& z : v) out.values.push_back(z.real());
  return out;
}

// Number of y mod q with y^2 = a.
inline u64 square_root_count(u64 q, u64 a) {
  u64 n = 0;
  for (u64 y = 0; y < q; ++y)
    if (mulmod64(y, y, q) == a % q) ++n;
  return n;
}

// t with 2^t = #{y : y^2 = 1 mod q}.
inline int two_rank(u64 q) {
  int t = 0;
  for (auto [p, e] : factorize(q)) {
    if (p != 2) ++t;
    else if (e == 2) t += 1;
    else if (e >= 3) t += 2;
  }
  return t;
}

// Predicted log log x slope of pi_{1/2}(x; q, b) - pi_{1/2}(x; q, a): the
// k = 2 terms contribute (N(a) - N(b)) / (2 phi(q)), N = square-root count.
// For a residue a and non-residue b this is 2^{t-1} / phi(q).
inline double predicted_race_slope(u64 q, u64 a, u64 b) {
  const double na = static_cast<double>(square_root_count(q, a));
  const double nb = static_cast<double>(square_root_count(q, b));
  return (na - nb) / (2.0 * static_cast<double>(euler_phi(q)));
}

// Fraction of integers 2 <= x <= x_max with pi(x; 4, 3) >= pi(x; 4, 1).
inline double classical_race_density(const PrimeTable& primes, u64 x_max) {
  if (x_max > primes.limit()) throw RangeError("classical_race_density: x_max exceeds prime table");
  if (x_max < 2) throw ArgumentError("classical_race_density: x_max must be >= 2");
  u64 leading = 0;
  i64 lead = 0;  // pi(x;4,3) - pi(x;4,1)
  u64 x = 2;
  for (std::size_t i = 0; i < primes.size() && primes[i] <= x_max; ++i) {
    const u64 p = primes[i];
    // integers in [x, p) share the current counts
    if (lead >= 0) leading += p - x;
    if (p % 4 == 3) ++lead;
    if (p % 4 == 1) --lead;
    x = p;
  }
  if (lead >= 0) leading += x_max + 1 - x;
  return static_cast<double>(leading) / static_cast<double>(x_max - 1);
}

}  // namespace drh
