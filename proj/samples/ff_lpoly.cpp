// L-polynomials of every character modulo T^2 + 1 over F_3: coefficients,
// inverse roots with their absolute values, and the trace formula residual.

#include <cstdio>

#include "drh/drh.hpp"

using namespace drh;
using namespace drh::ff;

int main() {
  const auto A = FqPoly::parse(3, "1,0,1");
  const FFCharacterGroup G(A);
  const auto pc = place_census(3, 12, {A});
  std::printf("modulus %s over F_3, %zu characters\n\n", A.to_string().c_str(), static_cast<std::size_t>(G.order()));
  for (const auto& chi : G.characters()) {
    std::printf("chi_%zu  order %lu  %s\n", chi.index, static_cast<unsigned long>(chi.order), chi.is_trivial() ? "trivial" : (chi.is_even ? "even" : "odd"));
    if (chi.is_trivial()) {
      std::printf("  trace residual (l <= 12): %.2e\n", trace_formula_check(chi, 12, pc, 0).max_residual);
      continue;
    }
    const auto L = l_polynomial(chi);
    std::printf("  L(u) =");
    for (std::size_t n = 0; n < L.coeffs.size(); ++n) std::printf(" %+.6f%+.6fi u^%zu", L.coeffs[n].real(), L.coeffs[n].imag(), n);
    std::printf("\n");
    for (const auto& lam : L.roots) std::printf("  lambda = %+.6f%+.6fi  |lambda| = %.6f\n", lam.real(), lam.imag(), std::abs(lam));
    std::printf("  r at centre %d, trace residual (l <= 12): %.2e\n", L.r_half, trace_formula_check(chi, 12, pc, 0, &L).max_residual);
  }
}
