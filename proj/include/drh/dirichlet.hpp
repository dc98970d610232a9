#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include "drh/core.hpp"

namespace drh {

// An exact root of unity exp(2 pi i k / ord), or zero when ord == 0.
struct CharacterValue {
  u64 k = 0;
  u64 ord = 1;

  bool is_zero() const noexcept { return ord == 0; }
  cplx as_complex() const {
    if (ord == 0) return {0.0, 0.0};
    return root_of_unity(k, ord);
  }

  static cplx root_of_unity(u64 k, u64 ord) {
    k %= ord;
    // Exact values on the axes keep real characters real.
    if (k == 0) return {1.0, 0.0};
    if (2 * k == ord) return {-1.0, 0.0};
    if (4 * k == ord) return {0.0, 1.0};
    if (4 * k == 3 * ord) return {0.0, -1.0};
    const double t = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(ord);
    return {std::cos(t), std::sin(t)};
  }

  friend bool operator==(const CharacterValue&, const CharacterValue&) = default;
};

namespace detail {

// Generators of (Z/p^e Z)^*: the smallest primitive root mod p^e for odd p;
// for 2^e: none (e = 1), {-1} (e = 2), {-1, 5} (e >= 3).
struct LocalGenerator {
  u64 modulus;  // p^e
  u64 gen;      // generator residue mod p^e
  u64 order;    // order of gen
};

inline bool is_primitive_root(u64 g, u64 m, u64 phi, const std::vector<PrimePower>& phi_f) {
  if (gcd64(g, m) != 1) return false;
  for (auto [r, e] : phi_f)
    if (powmod64(g, phi / r, m) == 1) return false;
  return true;
}

inline std::vector<LocalGenerator> local_generators(u64 p, int e) {
  u64 pe = 1;
  for (int i = 0; i < e; ++i) pe *= p;
  std::vector<LocalGenerator> gens;
  if (p == 2) {
    if (e == 2) gens.push_back({pe, pe - 1, 2});
    if (e >= 3) {
      gens.push_back({pe, pe - 1, 2});
      gens.push_back({pe, 5, pe / 4});
    }
    return gens;
  }
  const u64 phi = pe / p * (p - 1);
  const auto phi_f = factorize(phi);
  for (u64 g = 2; g < pe; ++g) {
    if (is_primitive_root(g, pe, phi, phi_f)) {
      gens.push_back({pe, g, phi});
      return gens;
    }
  }
  throw IntegrityError("no primitive root found mod " + std::to_string(pe));
}

}  // namespace detail

// The structure of (Z/qZ)^* against fixed generators, with discrete-log
// coordinates for every unit.
class UnitGroup {
 public:
  explicit UnitGroup(u64 q) : q_(q) {
    if (q == 0) throw ArgumentError("modulus must be >= 1");
    for (auto [p, e] : factorize(q))
      for (auto& g : detail::local_generators(p, e)) gens_.push_back(g);
    coords_.assign(q, {});
    unit_.assign(q, false);
    for (u64 n = 0; n < q; ++n) {
      if (gcd64(n, q) != 1 && q != 1) continue;
      unit_[n] = true;
      coords_[n].resize(gens_.size());
    }
    // Discrete logs per local component by direct powering.
    for (std::size_t i = 0; i < gens_.size(); ++i) {
      const auto& g = gens_[i];
      std::vector<i64> dlog(g.modulus, -1);
      u64 x = 1 % g.modulus;
      for (u64 k = 0; k < g.order; ++k) {
        dlog[x] = static_cast<i64>(k);
        x = mulmod64(x, g.gen, g.modulus);
      }
      for (u64 n = 0; n < q; ++n) {
        if (!unit_[n]) continue;
        u64 r = n % g.modulus;
        // For 2^e with e >= 3 the group is <-1> x <5>: split off the sign first.
        if (g.modulus % 2 == 0 && g.modulus >= 8) {
          const bool neg = (r % 4) == 3;
          if (g.gen == g.modulus - 1) {
            coords_[n][i] = neg ? 1 : 0;
            continue;
          }
          if (neg) r = g.modulus - r;
        }
        if (dlog[r] < 0) throw IntegrityError("discrete log failed");
        coords_[n][i] = static_cast<u64>(dlog[r]);
      }
    }
  }

  u64 modulus() const noexcept { return q_; }
  const std::vector<detail::LocalGenerator>& generators() const noexcept { return gens_; }
  bool is_unit(u64 n) const { return unit_[n % q_]; }
  const std::vector<u64>& coords(u64 n) const { return coords_[n % q_]; }
  u64 order() const { return euler_phi(q_); }

 private:
  u64 q_;
  std::vector<detail::LocalGenerator> gens_;
  std::vector<std::vector<u64>> coords_;
  std::vector<bool> unit_;
};

class DirichletCharacter {
 public:
  DirichletCharacter(u64 q, std::vector<u64> exponents, const UnitGroup& group) : q_(q), exps_(std::move(exponents)) {
    const auto& gens = group.generators();
    order_ = 1;
    for (std::size_t i = 0; i < gens.size(); ++i) {
      const u64 o = gens[i].order / gcd64(exps_[i] % gens[i].order, gens[i].order);
      order_ = std::lcm(order_, o);
    }
    table_.assign(q, -1);
    for (u64 n = 0; n < q; ++n) {
      if (!group.is_unit(n)) continue;
      const auto& c = group.coords(n);
      // sum_i e_i c_i / ord_i reduced to the common denominator order_
      u64 k = 0;
      for (std::size_t i = 0; i < gens.size(); ++i) {
        const u64 g = gcd64(exps_[i] % gens[i].order, gens[i].order);
        const u64 den = gens[i].order / g;
        const u64 num = static_cast<u64>((static_cast<u128>(exps_[i] / g) * c[i]) % den);
        k = (k + num * (order_ / den)) % order_;
      }
      table_[n] = static_cast<i64>(k);
    }
    // kappa = (1 + chi(-1)) / 2
    kappa_ = (q_ <= 2 || value(q_ - 1).k == 0) ? 1 : 0;
    conductor_ = compute_conductor();
  }

  u64 modulus() const noexcept { return q_; }
  u64 order() const noexcept { return order_; }
  u64 conductor() const noexcept { return conductor_; }
  bool is_primitive() const noexcept { return conductor_ == q_; }
  bool is_trivial() const noexcept { return order_ == 1; }
  const std::vector<u64>& exponents() const noexcept { return exps_; }
  int parity_kappa() const noexcept { return kappa_; }
  bool is_even() const noexcept { return kappa_ == 1; }

  // Exponent k with chi(n) = exp(2 pi i k / order), or -1 when gcd(n, q) > 1.
  i64 exponent(u64 n) const { return table_[n % q_]; }

  CharacterValue value(u64 n) const {
    const i64 k = table_[n % q_];
    if (k < 0) return {0, 0};
    return {static_cast<u64>(k), order_};
  }
  cplx operator()(u64 n) const { return value(n).as_complex(); }
  cplx operator()(i64 n) const { return value(static_cast<u64>(mod_floor(n, static_cast<i64>(q_)))).as_complex(); }

 private:
  u64 compute_conductor() const {
    if (q_ == 1) return 1;
    for (u64 d = 1; d <= q_; ++d) {
      if (q_ % d) continue;
      bool trivial_on_kernel = true;
      for (u64 n = 1; n < q_ && trivial_on_kernel; n += d) {
        // n ranges over residues = 1 mod d
        if (table_[n] > 0) trivial_on_kernel = false;
      }
      if (trivial_on_kernel) return d;
    }
    return q_;
  }

  u64 q_;
  std::vector<u64> exps_;
  u64 order_ = 1;
  std::vector<i64> table_;
  int kappa_ = 1;
  u64 conductor_ = 1;
};

// All phi(q) characters mod q, in lexicographic order of exponent vectors
// against the generators of UnitGroup. Index 0 is the trivial character.
inline std::vector<DirichletCharacter> enumerate_characters(u64 q) {
  if (q < 1) throw ArgumentError("enumerate_characters: q must be >= 1");
  const UnitGroup group(q);
  const auto& gens = group.generators();
  std::vector<DirichletCharacter> out;
  std::vector<u64> e(gens.size(), 0);
  while (true) {
    out.emplace_back(q, e, group);
    // odometer, last generator fastest
    std::size_t i = gens.size();
    while (i > 0) {
      --i;
      if (++e[i] < gens[i].order) break;
      e[i] = 0;
      if (i == 0) return out;
    }
    if (gens.empty()) return out;
  }
}

inline DirichletCharacter character_by_index(u64 q, std::size_t index) {
  auto all = enumerate_characters(q);
  if (index >= all.size())
    throw ArgumentError("character index " + std::to_string(index) + " out of range for modulus " + std::to_string(q));
  return all[index];
}

// The exponent nu of the sqrt(2) factor at the centre: 1 iff chi^2 is trivial.
inline int nu_exponent(const DirichletCharacter& chi) {
  if (chi.is_trivial()) throw ArgumentError("nu_exponent: undefined for the trivial character");
  return chi.order() <= 2 ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Hurwitz zeta via Euler-Maclaurin, and L(s, chi) = q^{-s} sum_a chi(a) zeta(s, a/q).
// ---------------------------------------------------------------------------

namespace detail {

// B_{2j} / (2j)! for j = 1..15.
inline constexpr std::array<double, 15> kBernoulliOverFactorial = {
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
    43867.0 / 798.0 / 6402373705728000.0,
    -174611.0 / 330.0 / 2432902008176640000.0,
    854513.0 / 138.0 / 1.1240007277776077e21,
    -236364091.0 / 2730.0 / 6.204484017332394e23,
    8553103.0 / 6.0 / 4.0329146112660565e26,
    -23749461029.0 / 870.0 / 3.0488834461171384e29,
    8615841276005.0 / 14322.0 / 2.6525285981219103e32,
};

// (e^w - 1) / w, stable near w = 0.
inline cplx expm1_over(cplx w) {
  if (std::abs(w) < 1e-4) return 1.0 + w / 2.0 + w * w / 6.0 + w * w * w / 24.0;
  return (std::exp(w) - 1.0) / w;
}

struct HurwitzParts {
  cplx regular;  // everything except the 1/(s-1) pole term
};

// zeta(s, a) - 1/(s-1), for a in (0, 1]. The pole is split off so that
// character sums (which annihilate it) stay finite at s = 1.
inline cplx hurwitz_minus_pole(cplx s, double a, int N) {
  ComplexKahanSum acc;
  for (int k = 0; k < N; ++k) acc.add(std::exp(-s * std::log(k + a)));
  const double Na = N + a;
  const double logNa = std::log(Na);
  // (N+a)^{1-s}/(s-1) - 1/(s-1) = -log(N+a) * (e^{w}-1)/w, w = (1-s) log(N+a)
  acc.add(-logNa * expm1_over((1.0 - s) * logNa));
  const cplx NaMinusS = std::exp(-s * logNa);
  acc.add(0.5 * NaMinusS);
  // Bernoulli tail: sum_j B_{2j}/(2j)! * s(s+1)...(s+2j-2) (N+a)^{-s-2j+1}
  cplx rising = s;  // s (s+1) ... (s+2j-2)
  cplx power = NaMinusS / Na;  // (N+a)^{-s-1}
  double last = 0;
  for (std::size_t j = 1; j <= kBernoulliOverFactorial.size(); ++j) {
    const cplx term = kBernoulliOverFactorial[j - 1] * rising * power;
    acc.add(term);
    last = std::abs(term);
    rising *= (s + static_cast<double>(2 * j - 1)) * (s + static_cast<double>(2 * j));
    power /= Na * Na;
    if (last < 1e-18 * std::max(1.0, std::abs(acc.value()))) break;
  }
  if (last > 1e-13 * std::max(1.0, std::abs(acc.value())))
    throw PrecisionError("Hurwitz zeta: Euler-Maclaurin tail did not converge");
  return acc.value();
}

inline int euler_maclaurin_depth(cplx s) { return 30 + static_cast<int>(std::abs(s.imag()) * 0.5); }

}  // namespace detail

// L(s, chi) for a primitive character (no contour derivatives).
inline cplx l_value_at(const DirichletCharacter& chi, cplx s) {
  const u64 q = chi.modulus();
  const int N = detail::euler_maclaurin_depth(s);
  ComplexKahanSum acc;
  cplx pole_weight = 0;
  for (u64 a = 1; a <= q; ++a) {
    const cplx c = chi(a % q);
    if (c == cplx{0, 0}) continue;
    acc.add(c * detail::hurwitz_minus_pole(s, static_cast<double>(a) / static_cast<double>(q), N));
    pole_weight += c;
  }
  cplx total = acc.value();
  if (std::abs(pole_weight) > 1e-12) {
    if (std::abs(s - 1.0) < 1e-14) throw SingularityError("L(s, chi) has a pole at s = 1 for the trivial character");
    total += pole_weight / (s - 1.0);
  }
  return std::exp(-s * std::log(static_cast<double>(q))) * total;
}

// m-th derivative of L(s, chi), m <= 3, by the trapezoid rule on a circle of
// radius 1/8 (64 nodes) around s.
inline cplx l_value(const DirichletCharacter& chi, cplx s, int m = 0) {
  if (!chi.is_primitive())
    throw ArgumentError("l_value: character mod " + std::to_string(chi.modulus()) + " is not primitive");
  if (!(s.real() >= 0 && s.real() <= 2)) throw DomainError("l_value: need 0 <= Re(s) <= 2");
  if (m < 0 || m > 3) throw ArgumentError("l_value: derivative order must lie in [0, 3]");
  if (m == 0) return l_value_at(chi, s);
  constexpr int kNodes = 64;
  constexpr double kRadius = 0.125;
  if (chi.is_trivial() && std::abs(s - 1.0) < 2 * kRadius)
    throw DomainError("l_value: contour would enclose the pole of zeta");
  ComplexKahanSum acc;
  for (int k = 0; k < kNodes; ++k) {
    const double th = 2.0 * kPi * k / kNodes;
    const cplx e = std::polar(1.0, th);
    acc.add(l_value_at(chi, s + kRadius * e) * std::polar(1.0, -m * th));
  }
  double fact = 1;
  for (int i = 2; i <= m; ++i) fact *= i;
  return acc.value() * (fact / (kNodes * std::pow(kRadius, m)));
}

}  // namespace drh
