#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "drh/core.hpp"

namespace drh {

// Ascending primes up to an inclusive limit. Immutable once built.
class PrimeTable {
 public:
  static constexpr u64 kBlockSize = u64{1} << 16;
  static constexpr u64 kMaxLimit = u64{1} << 40;

  PrimeTable() = default;
  PrimeTable(u64 limit, std::vector<u64> primes) : limit_(limit), primes_(std::move(primes)) {}

  u64 limit() const noexcept { return limit_; }
  u64 block_size() const noexcept { return kBlockSize; }
  std::span<const u64> primes() const& noexcept { return primes_; }
  std::span<const u64> primes() const&& = delete;
  std::size_t size() const noexcept { return primes_.size(); }
  u64 operator[](std::size_t i) const { return primes_[i]; }

  // Number of primes <= x.
  std::size_t count_upto(double x) const {
    if (x < 2) return 0;
    const u64 xi = x >= static_cast<double>(limit_) ? limit_ : static_cast<u64>(std::floor(x));
    return static_cast<std::size_t>(std::upper_bound(primes_.begin(), primes_.end(), xi) - primes_.begin());
  }

  friend bool operator==(const PrimeTable&, const PrimeTable&) = default;

 private:
  u64 limit_ = 0;
  std::vector<u64> primes_;
};

namespace detail {

inline std::vector<u64> simple_sieve(u64 n) {
  std::vector<u64> out;
  if (n < 2) return out;
  std::vector<bool> comp(n + 1, false);
  for (u64 i = 2; i <= n; ++i) {
    if (comp[i]) continue;
    out.push_back(i);
    for (u64 j = i * i; j <= n; j += i) comp[j] = true;
  }
  return out;
}

inline u64 isqrt(u64 n) {
  u64 r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

}  // namespace detail

// Segmented sieve of Eratosthenes over fixed 2^16-wide blocks. Blocks are
// independent, so the output does not depend on the thread count.
inline PrimeTable sieve_primes(u64 limit, unsigned threads = default_threads()) {
  if (limit < 2 || limit > PrimeTable::kMaxLimit)
    throw CapacityError("sieve_primes: limit must lie in [2, 2^40], got " + std::to_string(limit));

  const u64 root = detail::isqrt(limit);
  const std::vector<u64> base = detail::simple_sieve(root);
  const u64 B = PrimeTable::kBlockSize;
  const std::size_t nblocks = static_cast<std::size_t>(limit / B + 1);
  std::vector<std::vector<u64>> found(nblocks);

  parallel_blocks(nblocks, threads, [&](std::size_t b) {
    const u64 lo = static_cast<u64>(b) * B;
    const u64 hi = std::min(lo + B - 1, limit);
    std::vector<std::uint8_t> mark(hi - lo + 1, 1);
    for (u64 n = lo; n <= std::min<u64>(hi, 1); ++n) mark[n - lo] = 0;
    for (u64 p : base) {
      if (p * p > hi) break;
      u64 start = std::max(p * p, (lo + p - 1) / p * p);
      for (u64 m = start; m <= hi; m += p) mark[m - lo] = 0;
    }
    auto& out = found[b];
    for (u64 n = lo; n <= hi; ++n)
      if (mark[n - lo]) out.push_back(n);
  });

  std::size_t total = 0;
  for (const auto& v : found) total += v.size();
  std::vector<u64> primes;
  primes.reserve(total);
  for (const auto& v : found) primes.insert(primes.end(), v.begin(), v.end());
  return PrimeTable(limit, std::move(primes));
}

struct SummatorySample {
  double x = 0;
  double theta = 0;    // sum_{p<=x} log p
  double psi = 0;      // sum_{p^k<=x} log p
  double mertens = 0;  // sum_{p<=x} 1/p
};

inline SummatorySample summatory(const PrimeTable& table, double x) {
  if (x > static_cast<double>(table.limit()))
    throw RangeError("summatory: x exceeds prime table limit");
  SummatorySample s;
  s.x = x;
  if (x < 2) return s;
  KahanSum theta, psi, mert;
  const std::size_t n = table.count_upto(x);
  for (std::size_t i = 0; i < n; ++i) {
    const u64 p = table[i];
    const double lp = std::log(static_cast<double>(p));
    theta.add(lp);
    mert.add(1.0 / static_cast<double>(p));
    // number of k >= 1 with p^k <= x
    int k = 0;
    double pk = static_cast<double>(p);
    while (pk <= x) {
      ++k;
      pk *= static_cast<double>(p);
    }
    psi.add(k * lp);
  }
  s.theta = theta.value();
  s.psi = psi.value();
  s.mertens = mert.value();
  return s;
}

// Li(x) = p.v. int_0^x dt / log t. The integral is split at the singularity
// t = 1: the principal value across it is carried by the log|log x| term, and
// the regular remainder is the entire series sum (log x)^k / (k k!), summed in
// Ramanujan's accelerated form.
inline double logarithmic_integral(double x) {
  if (!(x > 1)) throw DomainError("logarithmic_integral: x must exceed 1");
  const double L = std::log(x);
  // li(x) = gamma + log L + sqrt(x) * sum_{n>=1} (-1)^{n-1} L^n / (n! 2^{n-1})
  //         * sum_{k=0}^{floor((n-1)/2)} 1/(2k+1)
  KahanSum sum;
  double inner = 0.0;
  double term = 1.0;  // L^n / (n! 2^{n-1}) built incrementally
  for (int n = 1; n < 400; ++n) {
    term *= L / n;
    if (n > 1) term *= 0.5;
    if (n % 2 == 1) inner += 1.0 / n;  // picks up 1/(2k+1) at 2k+1 = n
    const double t = ((n % 2) ? 1.0 : -1.0) * term * inner;
    sum.add(t);
    if (n > 2 * L + 10 && std::abs(t) < 1e-18 * std::abs(sum.value())) break;
  }
  return kEulerGamma + std::log(L) + std::sqrt(x) * sum.value();
}

// Number of monic irreducible polynomials of degree n over F_q.
inline u64 gauss_irreducible_count(u64 q, u64 n) {
  if (!is_prime_u64(q)) throw ArgumentError("gauss_irreducible_count: q must be prime");
  if (n < 1) throw ArgumentError("gauss_irreducible_count: n must be >= 1");
  i128 total = 0;
  for (u64 d = 1; d <= n; ++d) {
    if (n % d) continue;
    const int mu = moebius(d);
    if (mu == 0) continue;
    i128 pw = 1;
    for (u64 k = 0; k < n / d; ++k) {
      pw *= static_cast<i128>(q);
      if (pw > (static_cast<i128>(1) << 100)) throw OverflowError("gauss_irreducible_count: q^n too large");
    }
    total += mu * pw;
  }
  return static_cast<u64>(total / static_cast<i128>(n));
}

}  // namespace drh
