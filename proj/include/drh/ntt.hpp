#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "drh/core.hpp"

namespace drh {

// Exact integer power series with 128-bit coefficients.
struct IntSeries {
  std::vector<i128> coeffs;
  std::vector<u64> moduli;  // primes used by the last convolution producing this series

  friend bool operator==(const IntSeries& a, const IntSeries& b) { return a.coeffs == b.coeffs; }
};

namespace ntt {

struct Prime {
  u64 p;
  u64 g;
  int max_log;  // p - 1 is divisible by 2^max_log
};

// Five primes are used for reconstruction; the sixth is a check digit.
inline constexpr std::array<Prime, 6> kPrimes = {{
    {469762049, 3, 26},
    {754974721, 11, 24},
    {998244353, 3, 23},
    {1224736769, 3, 24},
    {1004535809, 3, 21},
    {167772161, 3, 25},
}};
inline constexpr int kMaxLog = 21;
inline constexpr int kCrtPrimes = 5;

inline u64 pw(u64 a, u64 e, u64 m) {
  u64 r = 1;
  a %= m;
  while (e) {
    if (e & 1) r = r * a % m;
    a = a * a % m;
    e >>= 1;
  }
  return r;
}

inline void transform(std::vector<u64>& a, const Prime& P, bool inverse) {
  const std::size_t n = a.size();
  const u64 p = P.p;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  std::vector<u64> w(n / 2 + 1);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    u64 wl = pw(P.g, (p - 1) / len, p);
    if (inverse) wl = pw(wl, p - 2, p);
    const std::size_t half = len / 2;
    w[0] = 1;
    for (std::size_t k = 1; k < half; ++k) w[k] = w[k - 1] * wl % p;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const u64 u = a[i + k];
        const u64 v = a[i + k + half] * w[k] % p;
        a[i + k] = u + v < p ? u + v : u + v - p;
        a[i + k + half] = u >= v ? u - v : u + p - v;
      }
    }
  }
  if (inverse) {
    const u64 ninv = pw(n % p, p - 2, p);
    for (auto& x : a) x = x * ninv % p;
  }
}

inline u64 reduce(i128 v, u64 p) {
  i128 r = v % static_cast<i128>(p);
  if (r < 0) r += p;
  return static_cast<u64>(r);
}

// Bound on max |c_n| for c = a * b, as min of the l1/linf and l2/l2 pairings.
inline long double product_bound(const std::vector<i128>& a, const std::vector<i128>& b, std::size_t out_len) {
  auto norms = [out_len](const std::vector<i128>& v, long double& l1, long double& l2, long double& linf) {
    l1 = l2 = linf = 0;
    const std::size_t n = std::min(v.size(), out_len);
    for (std::size_t i = 0; i < n; ++i) {
      const long double x = std::fabs(static_cast<long double>(v[i]));
      l1 += x;
      l2 += x * x;
      linf = std::max(linf, x);
    }
    l2 = std::sqrt(l2);
  };
  long double a1, a2, ai, b1, b2, bi;
  norms(a, a1, a2, ai);
  norms(b, b1, b2, bi);
  return std::min({a1 * bi, ai * b1, a2 * b2});
}

}  // namespace ntt

// Exact convolution of integer series, truncated to out_len, by NTT over
// five primes with CRT reconstruction and a sixth prime as a consistency
// check. |result| must stay below 2^126.
inline IntSeries ntt_convolve(const IntSeries& a, const IntSeries& b, std::size_t out_len) {
  if (a.coeffs.empty() || b.coeffs.empty()) return {std::vector<i128>(out_len, 0), {}};
  if (out_len > a.coeffs.size() + b.coeffs.size() - 1)
    throw ArgumentError("ntt_convolve: out_len exceeds len(a) + len(b) - 1");
  const long double capacity = std::ldexp(1.0L, 126);
  // The bound is slightly inflated to absorb long double rounding.
  if (ntt::product_bound(a.coeffs, b.coeffs, out_len) * (1.0L + 1e-15L) >= capacity)
    throw OverflowError("ntt_convolve: coefficient bound exceeds CRT capacity 2^126");

  const std::size_t la = std::min(a.coeffs.size(), out_len), lb = std::min(b.coeffs.size(), out_len);
  std::size_t n = 1;
  int lg = 0;
  while (n < la + lb - 1) {
    n <<= 1;
    ++lg;
  }
  if (lg > ntt::kMaxLog) throw CapacityError("ntt_convolve: transform length exceeds 2^21");

  const bool square = &a == &b || a.coeffs == b.coeffs;
  std::array<std::vector<u64>, ntt::kPrimes.size()> res;
  for (std::size_t k = 0; k < ntt::kPrimes.size(); ++k) {
    const auto& P = ntt::kPrimes[k];
    std::vector<u64> fa(n, 0);
    for (std::size_t i = 0; i < la; ++i) fa[i] = ntt::reduce(a.coeffs[i], P.p);
    ntt::transform(fa, P, false);
    if (square) {
      for (std::size_t i = 0; i < n; ++i) fa[i] = fa[i] * fa[i] % P.p;
    } else {
      std::vector<u64> fb(n, 0);
      for (std::size_t i = 0; i < lb; ++i) fb[i] = ntt::reduce(b.coeffs[i], P.p);
      ntt::transform(fb, P, false);
      for (std::size_t i = 0; i < n; ++i) fa[i] = fa[i] * fb[i] % P.p;
    }
    ntt::transform(fa, P, true);
    fa.resize(out_len);
    res[k] = std::move(fa);
  }

  // Garner on X = c + 2^126 >= 0, accumulated in wrapping u128 arithmetic;
  // X < 2^127 makes the wrapped value exact.
  constexpr int K = ntt::kCrtPrimes;
  u64 inv[K][K] = {};
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < i; ++j)
      inv[j][i] = ntt::pw(ntt::kPrimes[j].p % ntt::kPrimes[i].p, ntt::kPrimes[i].p - 2, ntt::kPrimes[i].p);
  const u128 offset = static_cast<u128>(1) << 126;
  u64 off_mod[ntt::kPrimes.size()];
  for (std::size_t k = 0; k < ntt::kPrimes.size(); ++k) off_mod[k] = static_cast<u64>(offset % ntt::kPrimes[k].p);

  IntSeries out;
  out.coeffs.resize(out_len);
  for (const auto& P : ntt::kPrimes) out.moduli.push_back(P.p);
  for (std::size_t t = 0; t < out_len; ++t) {
    u64 v[K];
    for (int i = 0; i < K; ++i) {
      const u64 p = ntt::kPrimes[i].p;
      u64 x = (res[i][t] + off_mod[i]) % p;
      for (int j = 0; j < i; ++j) {
        x = (x + p - v[j] % p) % p;
        x = x * inv[j][i] % p;
      }
      v[i] = x;
    }
    u128 X = 0, radix = 1;
    for (int i = 0; i < K; ++i) {
      X += static_cast<u128>(v[i]) * radix;
      radix *= ntt::kPrimes[i].p;
    }
    const u64 check_p = ntt::kPrimes[K].p;
    if (static_cast<u64>(X % check_p) != (res[K][t] + off_mod[K]) % check_p)
      throw OverflowError("ntt_convolve: CRT check digit mismatch at index " + std::to_string(t));
    if (X >> 127) throw OverflowError("ntt_convolve: reconstructed value outside capacity");
    out.coeffs[t] = static_cast<i128>(X) - static_cast<i128>(offset);
  }
  return out;
}

// O(n^2) reference convolution.
inline IntSeries schoolbook_convolve(const IntSeries& a, const IntSeries& b, std::size_t out_len) {
  IntSeries out;
  out.coeffs.assign(out_len, 0);
  for (std::size_t i = 0; i < a.coeffs.size() && i < out_len; ++i)
    for (std::size_t j = 0; j < b.coeffs.size() && i + j < out_len; ++j) out.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
  return out;
}

}  // namespace drh
