// Partial Euler products of L(s, chi_-4) and L(s, chi_5) at the centre, next to
// the predicted limit sqrt(2)^nu L(1/2).

#include <cstdio>

#include "drh/drh.hpp"

using namespace drh;

int main() {
  const auto primes = sieve_primes(10000000);
  const auto xs = geometric_checkpoints(1e3, 1e7, 9);
  struct Case {
    const char* label;
    u64 q;
    std::size_t idx;
  };
  for (const auto& [label, q, idx] : {Case{"dirichlet:q=4:idx=1", 4, 1}, Case{"dirichlet:q=5:idx=2", 5, 2}}) {
    const auto spec = spec_from_label(label);
    const auto chi = character_by_index(q, idx);
    const auto rep = drh_normalize(partial_product_trace(spec, 0.5, primes, xs), 0, nu_exponent(chi), l_value(chi, 0.5));
    std::printf("%s  nu = %d  target = %.6f%+.6fi\n", label, rep.nu, rep.target.real(), rep.target.imag());
    std::printf("%12s %22s %10s\n", "x", "P(x, 1/2)", "|P/t - 1|");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const cplx v = rep.trace.normalized[i];
      std::printf("%12.0f %10.6f%+10.6fi %10.4f\n", xs[i], v.real(), v.imag(), rep.deviations[i]);
    }
    std::printf("log-averaged deviation over the upper half: %.4f\n\n", rep.log_avg_dev);
  }
}
