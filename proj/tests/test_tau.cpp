#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "drh/euler_product.hpp"
#include "drh/lfunction.hpp"
#include "drh/ntt.hpp"
#include "drh/tau.hpp"

using namespace drh;

namespace {

// x prod_{n>=1} (1 - x^n)^24, multiplying one factor at a time.
std::vector<i128> naive_tau(std::size_t N) {
  std::vector<i128> c(N, 0);
  c[0] = 1;  // coefficient of x^1 sits at index 0
  for (std::size_t n = 1; n < N; ++n)
    for (int rep = 0; rep < 24; ++rep)
      for (std::size_t i = N; i-- > n;) c[i] -= c[i - n];
  return c;
}

i128 parse_i128(const std::string& s) {
  i128 v = 0;
  bool neg = false;
  for (char ch : s) {
    if (ch == '-') neg = true;
    else v = v * 10 + (ch - '0');
  }
  return neg ? -v : v;
}

const TauTable& big_table() {
  static const TauTable t = tau_table(1000000);
  return t;
}

}  // namespace

TEST(Tau, MatchesNaiveExpansion) {
  const auto t = tau_table(2000);
  EXPECT_EQ(t.values(), naive_tau(2000));
}

TEST(Tau, MatchesGoldenList) {
  std::ifstream in(std::string(DRH_TEST_DATA) + "/tau_2000.txt");
  ASSERT_TRUE(in);
  const auto t = tau_table(2000);
  std::size_t n;
  std::string v;
  std::size_t rows = 0;
  while (in >> n >> v) {
    EXPECT_TRUE(t(n) == parse_i128(v)) << n;
    ++rows;
  }
  EXPECT_EQ(rows, 2000u);
}

TEST(Tau, KnownValues) {
  const auto t = tau_table(100);
  EXPECT_TRUE(t(1) == 1);
  EXPECT_TRUE(t(2) == -24);
  EXPECT_TRUE(t(11) == 534612);
  EXPECT_TRUE(t(23) == 18643272);
  EXPECT_THROW(t(0), RangeError);
  EXPECT_THROW(t(101), RangeError);
  EXPECT_THROW(tau_table(0), CapacityError);
  EXPECT_THROW(tau_table(1000001), CapacityError);
}

TEST(Tau, Multiplicative) {
  const auto& t = big_table();
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t m = 1 + rng() % 1000, n = 1 + rng() % 1000;
    if (std::gcd(m, n) != 1) continue;
    EXPECT_TRUE(t(m * n) == t(m) * t(n)) << m << " " << n;
  }
  // Hecke at prime squares: tau(p^2) = tau(p)^2 - p^11
  for (u64 p : {2, 3, 5, 7, 11, 13, 31}) {
    i128 p11 = 1;
    for (int k = 0; k < 11; ++k) p11 *= p;
    EXPECT_TRUE(t(p * p) == t(p) * t(p) - p11) << p;
  }
}

TEST(Tau, Ramanujan691Congruence) {
  const auto& t = big_table();
  const auto sigma = sigma11_mod(100000, 691);
  for (std::size_t n = 1; n <= 100000; ++n) {
    const i128 r = ((t(n) % 691) + 691) % 691;
    ASSERT_EQ(static_cast<u64>(r), sigma[n]) << n;
  }
}

TEST(Tau, DeligneBound) {
  const auto& t = big_table();
  const auto primes = sieve_primes(100000);
  for (u64 p : primes.primes()) ASSERT_LE(std::abs(tau_normalized(t, p)), 2.0) << p;
  const auto angles = satake_angles(t, primes.primes());
  for (const auto& a : angles) {
    EXPECT_GE(a.theta, 0.0);
    EXPECT_LE(a.theta, kPi);
  }
}

TEST(Tau, BiasSeriesGolden) {
  std::ifstream in(std::string(DRH_TEST_DATA) + "/tau_bias_1e6.csv");
  ASSERT_TRUE(in);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,value,loglogx");
  std::vector<double> xs, vs;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string x, v;
    std::getline(ss, x, ',');
    std::getline(ss, v, ',');
    xs.push_back(std::stod(x));
    vs.push_back(std::stod(v));
  }
  ASSERT_EQ(xs.size(), 64u);
  EXPECT_EQ(xs, default_checkpoints(1e6, 64));
  const auto primes = sieve_primes(1000000);
  auto s = tau_bias_series(big_table(), primes, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(s.values[i], vs[i], 1e-12) << xs[i];
  loglog_fit(s);
  EXPECT_GE(s.fit->slope, 0.2);
  EXPECT_LE(s.fit->slope, 0.8);
}

TEST(Ntt, MatchesSchoolbook) {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 100; ++trial) {
    IntSeries a, b;
    const i64 span = trial % 2 ? (i64{1} << 40) : 1000;
    for (int i = 0; i < 512; ++i) {
      a.coeffs.push_back(static_cast<i128>(static_cast<i64>(rng() % (2 * span + 1)) - span));
      b.coeffs.push_back(static_cast<i128>(static_cast<i64>(rng() % (2 * span + 1)) - span));
    }
    EXPECT_EQ(ntt_convolve(a, b, 1023), schoolbook_convolve(a, b, 1023)) << trial;
    EXPECT_EQ(ntt_convolve(a, a, 700), schoolbook_convolve(a, a, 700)) << trial;
  }
}

TEST(Ntt, OverflowIsDetected) {
  IntSeries a;
  a.coeffs.assign(64, static_cast<i128>(1) << 62);
  EXPECT_THROW(ntt_convolve(a, a, 127), OverflowError);
  EXPECT_THROW(ntt_convolve(a, a, 128), ArgumentError);
}
