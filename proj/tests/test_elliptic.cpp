#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "drh/elliptic.hpp"
#include "drh/euler_product.hpp"

using namespace drh;

namespace {

// a_p from the nonsingular points (plus infinity) of y^2 = x^3 + a x + b, counted pair by pair.
i64 brute_ap(i64 a, i64 b, u64 p, bool bad) {
  const i64 P = static_cast<i64>(p);
  const i64 A = mod_floor(a, P), B = mod_floor(b, P);
  i64 count = 0;
  for (i64 x = 0; x < P; ++x)
    for (i64 y = 0; y < P; ++y) {
      const i64 F = mod_floor(y * y - x * x * x - A * x - B, P);
      if (F != 0) continue;
      const bool singular = mod_floor(3 * x * x + A, P) == 0 && mod_floor(2 * y, P) == 0;
      if (!singular) ++count;
    }
  // multiplicative reduction gives p - 1 or p + 1 nonsingular points, additive gives p
  return bad ? P - (count + 1) : P + 1 - (count + 1);
}

}  // namespace

TEST(Elliptic, PointCountsMatchBruteForce) {
  std::mt19937_64 rng(2024);
  const auto primes = sieve_primes(200);
  int curves = 0;
  while (curves < 10) {
    const i64 a = static_cast<i64>(rng() % 201) - 100, b = static_cast<i64>(rng() % 201) - 100;
    if (4 * a * a * a + 27 * b * b == 0) continue;
    const EllipticCurve E(a, b);
    ++curves;
    for (u64 p : primes.primes()) EXPECT_EQ(count_points_ap(E, p), brute_ap(a, b, p, E.is_bad(p))) << a << " " << b << " p=" << p;
  }
}

TEST(Elliptic, Discriminant) {
  const EllipticCurve E(-1, 0);
  EXPECT_TRUE(E.disc() == 64);
  EXPECT_EQ(E.bad_primes(), std::vector<u64>{2});
  const EllipticCurve F(-16, 16);
  EXPECT_TRUE(F.disc() == -16 * (4 * -4096 + 27 * 256));
  EXPECT_THROW(EllipticCurve(0, 0), ArgumentError);
  EXPECT_THROW(EllipticCurve(-3, 2), ArgumentError);
  // 2^12 * 3^12 | disc of y^2 = x^3 - 6^4 x: a non-minimal model at 2 and 3
  const EllipticCurve G(-1296, 0);
  EXPECT_EQ(G.possibly_nonminimal_primes(), (std::vector<u64>{2, 3}));
}

TEST(Elliptic, ComplexMultiplicationVanishing) {
  // y^2 = x^3 - x has a_p = 0 for p = 3 mod 4
  const EllipticCurve E(-1, 0);
  const auto primes = sieve_primes(3000);
  for (u64 p : primes.primes())
    if (p % 4 == 3) {
      EXPECT_EQ(count_points_ap(E, p), 0) << p;
    }
}

TEST(Elliptic, HasseBound) {
  const auto primes = sieve_primes(100000);
  for (auto [a, b] : {std::pair<i64, i64>{-1, 0}, {-16, 16}, {1, 1}, {-7, 10}}) {
    const EllipticCurve E(a, b);
    const auto t = compute_ap_table(E, primes, 100000, 2);
    for (std::size_t i = 0; i < t.primes.size(); ++i) {
      if (E.is_bad(t.primes[i])) {
        EXPECT_LE(std::abs(t.ap[i]), 1);
        continue;
      }
      ASSERT_LE(static_cast<double>(t.ap[i]) * t.ap[i], 4.0 * static_cast<double>(t.primes[i])) << t.primes[i];
    }
  }
}

TEST(Elliptic, ThreadIndependentTable) {
  const auto primes = sieve_primes(50000);
  const EllipticCurve E(-16, 16);
  EXPECT_EQ(compute_ap_table(E, primes, 50000, 1), compute_ap_table(E, primes, 50000, 7));
}

TEST(Elliptic, ProductFormsAgree) {
  const auto primes = sieve_primes(100000);
  for (auto [a, b] : {std::pair<i64, i64>{-1, 0}, {-16, 16}, {-7, 10}}) {
    const EllipticCurve E(a, b);
    const auto t = compute_ap_table(E, primes, 100000);
    const auto xs = default_checkpoints(1e5, 16);
    const auto tr = bsd_product_trace(E, t, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(bsd_log_product_split(E, t, xs[i]), tr.log_values[i].real(), 1e-12);
  }
}

TEST(Elliptic, RankOrdering) {
  const auto primes = sieve_primes(100000);
  const auto xs = default_checkpoints(1e5, 64);
  const auto r0 = rank_fit(bsd_product_trace(EllipticCurve(-1, 0), primes, xs));
  const auto r1 = rank_fit(bsd_product_trace(EllipticCurve(-16, 16), primes, xs));
  EXPECT_LT(r0.r_hat, r1.r_hat);
}

TEST(Elliptic, RangeChecks) {
  const auto primes = sieve_primes(1000);
  const EllipticCurve E(-1, 0);
  EXPECT_THROW(compute_ap_table(E, primes, 2000), RangeError);
  const auto t = compute_ap_table(E, primes, 500);
  EXPECT_THROW(bsd_product_trace(E, t, {100.0, 600.0}), RangeError);
  EXPECT_THROW(rank_fit(bsd_product_trace(E, t, {100.0, 200.0, 300.0})), Error);
}
