#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "drh/ntt.hpp"
#include "drh/primes.hpp"
#include "drh/series.hpp"

namespace drh {

class TauTable {
 public:
  static constexpr std::size_t kMaxN = 1000000;

  TauTable() = default;
  explicit TauTable(std::vector<i128> values) : values_(std::move(values)) {}

  std::size_t N() const noexcept { return values_.size(); }
  // tau(n) for 1 <= n <= N.
  i128 operator()(std::size_t n) const {
    if (n < 1 || n > values_.size()) throw RangeError("tau: n = " + std::to_string(n) + " outside table");
    return values_[n - 1];
  }
  const std::vector<i128>& values() const noexcept { return values_; }

  friend bool operator==(const TauTable&, const TauTable&) = default;

 private:
  std::vector<i128> values_;
};

// prod (1 - x^n)^3 = sum_k (-1)^k (2k+1) x^{k(k+1)/2}, truncated to len terms.
inline IntSeries eta_cube_series(std::size_t len) {
  IntSeries s;
  s.coeffs.assign(len, 0);
  for (std::size_t k = 0;; ++k) {
    const std::size_t e = k * (k + 1) / 2;
    if (e >= len) break;
    s.coeffs[e] = (k % 2 ? -1 : 1) * static_cast<i128>(2 * k + 1);
  }
  return s;
}

// tau(1..N): Delta = x * (eta^3)^8, three exact squarings.
inline TauTable tau_table(std::size_t N) {
  if (N < 1 || N > TauTable::kMaxN) throw CapacityError("tau_table: N must lie in [1, 10^6]");
  IntSeries s = eta_cube_series(N);
  for (int i = 0; i < 3; ++i) s = ntt_convolve(s, s, N);
  return TauTable(std::move(s.coeffs));
}

inline double tau_normalized(const TauTable& t, u64 p) {
  return static_cast<double>(t(p)) / std::pow(static_cast<double>(p), 5.5);
}

// sum_{p <= x} tau(p) / p^6 at each checkpoint.
inline BiasSeries tau_bias_series(const TauTable& table, const PrimeTable& primes, const std::vector<double>& checkpoints) {
  BiasSeries out;
  out.label = "tau";
  out.weight = 6;
  out.checkpoints = checkpoints;
  if (checkpoints.empty()) return out;
  const double cap = std::min(static_cast<double>(table.N()), static_cast<double>(primes.limit()));
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] > cap) throw RangeError("tau_bias_series: checkpoint exceeds table range");
    if (i && checkpoints[i] < checkpoints[i - 1]) throw ArgumentError("tau_bias_series: checkpoints must ascend");
  }
  KahanSum acc;
  std::size_t j = 0;
  for (double x : checkpoints) {
    for (; j < primes.size() && static_cast<double>(primes[j]) <= x; ++j) {
      const u64 p = primes[j];
      // tau(p)/p^6 = (tau(p)/p^{11/2}) / sqrt(p)
      acc.add(tau_normalized(table, p) / std::sqrt(static_cast<double>(p)));
    }
    out.values.push_back(acc.value());
  }
  return out;
}

// sigma_11(n) mod m for n = 1..N by a divisor sieve.
inline std::vector<u64> sigma11_mod(std::size_t N, u64 m) {
  std::vector<u64> s(N + 1, 0);
  for (std::size_t d = 1; d <= N; ++d) {
    const u64 d11 = powmod64(d, 11, m);
    for (std::size_t k = d; k <= N; k += d) s[k] = (s[k] + d11) % m;
  }
  return s;
}

}  // namespace drh
