// Square-root weighted prime races: the drift of pi_{1/2}(x; q, b) - pi_{1/2}(x; q, a)
// against log log x, beside the slope predicted from square-root counts.

#include <cstdio>

#include "drh/drh.hpp"

using namespace drh;

int main() {
  const auto primes = sieve_primes(10000000);
  const auto xs = default_checkpoints(1e7, 64);
  struct Race {
    u64 q, a, b;
  };
  std::printf("%4s %3s %3s %10s %10s\n", "q", "a", "b", "fitted C", "predicted");
  for (const auto& [q, a, b] : {Race{4, 1, 3}, Race{3, 1, 2}, Race{8, 1, 3}, Race{8, 1, 5}, Race{5, 1, 2}, Race{5, 2, 3}}) {
    auto s = race_series(q, a, b, 0.5, primes, xs);
    loglog_fit(s);
    std::printf("%4lu %3lu %3lu %10.4f %10.4f\n", static_cast<unsigned long>(q), static_cast<unsigned long>(a),
                static_cast<unsigned long>(b), s.fit->slope, predicted_race_slope(q, a, b));
  }
  std::printf("\nshare of x <= 1e7 with pi(x;4,3) >= pi(x;4,1): %.6f\n", classical_race_density(primes, 10000000));
}
