#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "drh/dirichlet.hpp"
#include "drh/euler_product.hpp"
#include "drh/series.hpp"

namespace drh::ff {

inline constexpr int kMaxPolyDegree = 40;

// Polynomial over F_q (q prime), little-endian coefficients, no leading zeros.
class FqPoly {
 public:
  FqPoly() = default;
  FqPoly(u64 q, std::vector<u64> coeffs) : q_(q), c_(std::move(coeffs)) {
    if (!is_prime_u64(q)) throw ArgumentError("FqPoly: q = " + std::to_string(q) + " is not prime");
    for (auto& x : c_) x %= q_;
    trim();
  }

  static FqPoly monomial(u64 q, int n) {
    std::vector<u64> c(static_cast<std::size_t>(n) + 1, 0);
    c.back() = 1;
    return {q, std::move(c)};
  }

  // Monic polynomial of degree n whose lower coefficients are the base-q
  // digits of index.
  static FqPoly from_monic_index(u64 q, int n, u64 index) {
    std::vector<u64> c(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i) {
      c[i] = index % q;
      index /= q;
    }
    c[n] = 1;
    return {q, std::move(c)};
  }

  // "c0,c1,...,cn", lowest degree first.
  static FqPoly parse(u64 q, const std::string& text) {
    std::vector<u64> c;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      while (used < tok.size() && tok[used] == ' ') ++used;
      if (used == 0 || used != tok.size()) throw ArgumentError("FqPoly::parse: bad coefficient '" + tok + "'");
      c.push_back(static_cast<u64>(mod_floor(v, static_cast<i64>(q))));
    }
    if (c.empty()) throw ArgumentError("FqPoly::parse: empty coefficient list");
    return {q, std::move(c)};
  }

  u64 q() const noexcept { return q_; }
  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const noexcept { return c_.empty(); }
  bool is_monic() const noexcept { return !c_.empty() && c_.back() == 1; }
  const std::vector<u64>& coeffs() const noexcept { return c_; }
  u64 operator[](std::size_t i) const noexcept { return i < c_.size() ? c_[i] : 0; }

  u64 monic_index() const {
    if (!is_monic()) throw ArgumentError("monic_index: polynomial is not monic");
    u64 idx = 0;
    for (int i = degree() - 1; i >= 0; --i) idx = idx * q_ + c_[i];
    return idx;
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < c_.size(); ++i) s += (i ? "," : "") + std::to_string(c_[i]);
    return s.empty() ? "0" : s;
  }

  FqPoly make_monic() const {
    if (is_zero()) throw ArgumentError("make_monic: zero polynomial");
    const u64 inv = powmod64(c_.back(), q_ - 2, q_);
    std::vector<u64> c = c_;
    for (auto& x : c) x = mulmod64(x, inv, q_);
    return {q_, std::move(c)};
  }

  friend FqPoly operator+(const FqPoly& a, const FqPoly& b) {
    const u64 q = a.q_ ? a.q_ : b.q_;
    std::vector<u64> c(std::max(a.c_.size(), b.c_.size()), 0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = (a[i] + b[i]) % q;
    return {q, std::move(c)};
  }
  friend FqPoly operator-(const FqPoly& a, const FqPoly& b) {
    const u64 q = a.q_ ? a.q_ : b.q_;
    std::vector<u64> c(std::max(a.c_.size(), b.c_.size()), 0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = (a[i] + q - b[i]) % q;
    return {q, std::move(c)};
  }
  friend FqPoly operator*(const FqPoly& a, const FqPoly& b) {
    const u64 q = a.q_ ? a.q_ : b.q_;
    if (a.is_zero() || b.is_zero()) return {q, {}};
    std::vector<u64> c(a.c_.size() + b.c_.size() - 1, 0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] = (c[i + j] + a.c_[i] * b.c_[j]) % q;
    return {q, std::move(c)};
  }

  // a = quot * b + rem with deg rem < deg b.
  static void divmod(const FqPoly& a, const FqPoly& b, FqPoly& quot, FqPoly& rem) {
    if (b.is_zero()) throw DomainError("FqPoly: division by zero polynomial");
    const u64 q = b.q_;
    std::vector<u64> r = a.c_;
    const int db = b.degree();
    const u64 inv = powmod64(b.c_.back(), q - 2, q);
    std::vector<u64> qt(a.degree() >= db ? static_cast<std::size_t>(a.degree() - db + 1) : 0, 0);
    for (int i = a.degree(); i >= db; --i) {
      const u64 coef = r[i] * inv % q;
      if (!coef) continue;
      qt[i - db] = coef;
      for (int j = 0; j <= db; ++j) r[i - db + j] = (r[i - db + j] + (q - coef) * b.c_[j]) % q;
    }
    quot = FqPoly(q, std::move(qt));
    r.resize(std::min<std::size_t>(r.size(), static_cast<std::size_t>(std::max(db, 0))));
    rem = FqPoly(q, std::move(r));
  }

  friend FqPoly operator%(const FqPoly& a, const FqPoly& b) {
    FqPoly qu, r;
    divmod(a, b, qu, r);
    return r;
  }
  friend FqPoly operator/(const FqPoly& a, const FqPoly& b) {
    FqPoly qu, r;
    divmod(a, b, qu, r);
    return qu;
  }

  friend bool operator==(const FqPoly& a, const FqPoly& b) { return a.q_ == b.q_ && a.c_ == b.c_; }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }

  u64 q_ = 0;
  std::vector<u64> c_;
};

inline FqPoly gcd(FqPoly a, FqPoly b) {
  while (!b.is_zero()) {
    FqPoly r = a % b;
    a = std::move(b);
    b = std::move(r);
  }
  return a.is_zero() ? a : a.make_monic();
}

inline u64 checked_power(u64 q, int n, u64 cap, const char* who) {
  u64 r = 1;
  for (int i = 0; i < n; ++i) {
    if (r > cap / q) throw CapacityError(std::string(who) + ": q^n exceeds the supported size");
    r *= q;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Irreducible sieve over monic polynomials, one degree at a time.
// ---------------------------------------------------------------------------

inline constexpr u64 kMaxSieveEntries = u64{1} << 33;

namespace detail {

// Marks base + index of every h = start + f * g with g running over all
// polynomials of degree < free_digits; start holds the digits of h.
inline void mark_coset(const std::vector<u64>& f, std::array<u64, kMaxPolyDegree + 1>& prod, int free_digits, u64 q,
                       const std::vector<u64>& qpow, std::vector<u64>& bits, u64 base) {
  const int d = static_cast<int>(f.size()) - 1;
  std::array<u64, kMaxPolyDegree + 1> g{};
  i64 idx = 0;
  for (int i = 0; i < free_digits + d; ++i) idx += static_cast<i64>(prod[i] * qpow[i]);
  while (true) {
    const u64 at = base + static_cast<u64>(idx);
    bits[at >> 6] |= u64{1} << (at & 63);
    int j = 0;
    for (;; ++j) {
      if (j == free_digits) return;
      // g_j += 1 adds f * T^j
      for (int i = 0; i <= d; ++i) {
        const int pos = i + j;
        const u64 old = prod[pos];
        u64 nw = old + f[i];
        if (nw >= q) nw -= q;
        prod[pos] = nw;
        idx += (static_cast<i64>(nw) - static_cast<i64>(old)) * static_cast<i64>(qpow[pos]);
      }
      if (++g[j] < q) break;
      g[j] = 0;
    }
  }
}

// Residues mod f kept as digit vectors while the sieve walks tiles.
struct TileFactor {
  std::vector<u64> f;
  int d = 0;
  std::vector<u64> tpow;  // (D + 1) x d digits of T^i mod f
  std::vector<u64> r;     // current residue of T^n + tile * T^k
  void add_tpow(int i, u64 q) {
    for (int j = 0; j < d; ++j) {
      r[j] += tpow[static_cast<std::size_t>(i) * d + j];
      if (r[j] >= q) r[j] -= q;
    }
  }
};

inline TileFactor make_tile_factor(std::vector<u64> f, u64 q, int D) {
  TileFactor t;
  t.d = static_cast<int>(f.size()) - 1;
  t.tpow.assign(static_cast<std::size_t>(D + 1) * t.d, 0);
  std::vector<u64> r(static_cast<std::size_t>(t.d), 0);
  r[0] = 1;
  for (int i = 0; i <= D; ++i) {
    std::copy(r.begin(), r.end(), t.tpow.begin() + static_cast<std::ptrdiff_t>(i) * t.d);
    const u64 top = r[t.d - 1];
    for (int j = t.d - 1; j > 0; --j) r[j] = r[j - 1];
    r[0] = 0;
    for (int j = 0; j < t.d; ++j) r[j] = (r[j] + (q - top) * f[j]) % q;
  }
  t.f = std::move(f);
  t.r.assign(static_cast<std::size_t>(t.d), 0);
  return t;
}

}  // namespace detail

// Calls visit(n, index) for every monic irreducible of degree 1..D over F_q,
// in ascending (degree, index) order. Degrees above the tile size are sieved
// one cache-sized tile of low digits at a time.
inline constexpr u64 kSieveTileBits = u64{1} << 19;

template <class Visit>
void for_each_irreducible(u64 q, int D, Visit&& visit, u64 tile_bits = kSieveTileBits) {
  if (!is_prime_u64(q)) throw ArgumentError("for_each_irreducible: q must be prime");
  if (D > kMaxPolyDegree) throw CapacityError("for_each_irreducible: degree too large");
  if (D < 1) return;
  checked_power(q, D, kMaxSieveEntries, "for_each_irreducible");
  std::vector<u64> qpow(static_cast<std::size_t>(D) + 1, 1);
  for (int i = 1; i <= D; ++i) qpow[i] = qpow[i - 1] * q;
  int k = 1;
  while (k < D && qpow[k + 1] <= tile_bits) ++k;
  std::vector<std::vector<detail::TileFactor>> small(static_cast<std::size_t>(D / 2) + 1);
  std::array<u64, kMaxPolyDegree + 1> prod{};
  for (int n = 1; n <= D; ++n) {
    const u64 size = qpow[n];
    std::vector<u64> bits((size + 63) / 64, 0);
    if (n <= k) {
      for (int d = 1; d <= n / 2; ++d)
        for (const auto& t : small[d]) {
          // monic multiples f * (T^{n-d} + g)
          prod.fill(0);
          for (int i = 0; i < d; ++i) prod[n - d + i] = t.f[i];
          detail::mark_coset(t.f, prod, n - d, q, qpow, bits, 0);
        }
    } else {
      std::vector<detail::TileFactor*> active;
      for (int d = 1; d <= n / 2; ++d)
        for (auto& t : small[d]) {
          std::copy(t.tpow.begin() + static_cast<std::ptrdiff_t>(n) * t.d, t.tpow.begin() + static_cast<std::ptrdiff_t>(n + 1) * t.d,
                    t.r.begin());
          active.push_back(&t);
        }
      std::vector<u64> digits(static_cast<std::size_t>(n - k), 0);
      const u64 tiles = qpow[n - k];
      for (u64 tile = 0;;) {
        for (auto* t : active) {
          if (t->d > k) {
            // at most one multiple: -r itself when it has fewer than k digits
            bool fits = true;
            for (int j = k; j < t->d; ++j) fits = fits && t->r[j] == 0;
            if (!fits) continue;
            u64 low = 0;
            for (int j = 0; j < k; ++j) low += ((q - t->r[j]) % q) * qpow[j];
            const u64 at = tile * qpow[k] + low;
            bits[at >> 6] |= u64{1} << (at & 63);
            continue;
          }
          prod.fill(0);
          for (int j = 0; j < t->d; ++j) prod[j] = (q - t->r[j]) % q;
          detail::mark_coset(t->f, prod, k - t->d, q, qpow, bits, tile * qpow[k]);
        }
        if (++tile == tiles) break;
        int carried = 0;
        for (std::size_t i = 0;; ++i) {
          ++carried;
          if (++digits[i] < q) break;
          digits[i] = 0;
        }
        for (auto* t : active)
          for (int i = 0; i < carried; ++i) t->add_tpow(k + i, q);
      }
    }
    for (u64 w = 0; w < bits.size(); ++w) {
      u64 free = ~bits[w];
      if (w == bits.size() - 1 && size % 64) free &= (u64{1} << (size % 64)) - 1;
      while (free) {
        const u64 idx = w * 64 + static_cast<u64>(__builtin_ctzll(free));
        free &= free - 1;
        visit(n, idx);
        if (n <= D / 2) small[n].push_back(detail::make_tile_factor(FqPoly::from_monic_index(q, n, idx).coeffs(), q, D));
      }
    }
  }
}

struct IrreducibleList {
  u64 q = 0;
  std::vector<std::vector<u64>> by_degree;  // monic indices, [0] unused
  FqPoly poly(int n, std::size_t i) const { return FqPoly::from_monic_index(q, n, by_degree[n][i]); }
};

inline IrreducibleList enumerate_monic_irreducibles(u64 q, int D) {
  checked_power(q, std::max(D, 0), u64{1} << 28, "enumerate_monic_irreducibles");
  IrreducibleList out;
  out.q = q;
  out.by_degree.resize(static_cast<std::size_t>(std::max(D, 0)) + 1);
  for_each_irreducible(q, D, [&](int n, u64 idx) { out.by_degree[n].push_back(idx); });
  return out;
}

// ---------------------------------------------------------------------------
// F_q[T] / A with residues encoded as base-q indices of the remainder.
// ---------------------------------------------------------------------------

class ResidueRing {
 public:
  static constexpr u64 kMaxSize = u64{1} << 24;

  explicit ResidueRing(const FqPoly& A) : A_(A), q_(A.q()), m_(A.degree()) {
    if (!A.is_monic() || m_ < 1) throw ArgumentError("ResidueRing: modulus must be monic of degree >= 1");
    if (m_ > kMaxPolyDegree) throw CapacityError("ResidueRing: modulus degree too large");
    size_ = checked_power(q_, m_, kMaxSize, "ResidueRing");
    qpow_.assign(static_cast<std::size_t>(m_) + 1, 1);
    for (int i = 1; i <= m_; ++i) qpow_[i] = qpow_[i - 1] * q_;
  }

  u64 q() const noexcept { return q_; }
  int degree() const noexcept { return m_; }
  u64 size() const noexcept { return size_; }
  const FqPoly& modulus() const noexcept { return A_; }
  u64 qpow(int i) const { return qpow_[i]; }

  void digits(u64 x, u64* out) const {
    for (int i = 0; i < m_; ++i) {
      out[i] = x % q_;
      x /= q_;
    }
  }
  u64 encode(const u64* d) const {
    u64 x = 0;
    for (int i = m_ - 1; i >= 0; --i) x = x * q_ + d[i];
    return x;
  }

  u64 add(u64 x, u64 y) const {
    u64 a[kMaxPolyDegree], b[kMaxPolyDegree];
    digits(x, a);
    digits(y, b);
    for (int i = 0; i < m_; ++i) a[i] = (a[i] + b[i]) % q_;
    return encode(a);
  }

  u64 mul(u64 x, u64 y) const {
    u64 a[kMaxPolyDegree], b[kMaxPolyDegree], c[2 * kMaxPolyDegree] = {};
    digits(x, a);
    digits(y, b);
    for (int i = 0; i < m_; ++i) {
      if (!a[i]) continue;
      for (int j = 0; j < m_; ++j) c[i + j] = (c[i + j] + a[i] * b[j]) % q_;
    }
    reduce_in_place(c, 2 * m_ - 2);
    return encode(c);
  }

  u64 pow(u64 x, u64 e) const {
    u64 r = one();
    while (e) {
      if (e & 1) r = mul(r, x);
      x = mul(x, x);
      e >>= 1;
    }
    return r;
  }

  u64 one() const { return 1 % size_; }

  // Residue of an arbitrary polynomial.
  u64 reduce(const FqPoly& f) const {
    std::vector<u64> c(f.coeffs());
    if (static_cast<int>(c.size()) < m_) c.resize(static_cast<std::size_t>(m_), 0);
    reduce_in_place(c.data(), static_cast<int>(f.coeffs().size()) - 1);
    return encode(c.data());
  }

  FqPoly poly(u64 x) const {
    std::vector<u64> d(static_cast<std::size_t>(m_));
    digits(x, d.data());
    return {q_, std::move(d)};
  }

 private:
  // Reduces c[0..top] modulo the monic A, leaving the remainder in c[0..m-1].
  void reduce_in_place(u64* c, int top) const {
    const auto& a = A_.coeffs();
    for (int i = top; i >= m_; --i) {
      const u64 coef = c[i] % q_;
      c[i] = 0;
      if (!coef) continue;
      for (int j = 0; j < m_; ++j) c[i - m_ + j] = (c[i - m_ + j] + (q_ - coef) * a[j]) % q_;
    }
  }

  FqPoly A_;
  u64 q_;
  int m_;
  u64 size_ = 1;
  std::vector<u64> qpow_;
};

// ---------------------------------------------------------------------------
// Characters of (F_q[T]/A)^*.
// ---------------------------------------------------------------------------

struct FFCharacter {
  FqPoly modulus;
  std::size_t index = 0;
  std::vector<u64> exponents;  // against FFCharacterGroup::basis()
  u64 order = 1;
  bool is_even = true;  // trivial on F_q^*
  std::shared_ptr<const std::vector<i64>> table;  // residue index -> exponent k (value e^{2 pi i k / order}), -1 off units

  bool is_trivial() const noexcept { return order == 1; }
  i64 exponent(u64 residue) const { return (*table)[residue]; }
  CharacterValue value(u64 residue) const {
    const i64 k = (*table)[residue];
    if (k < 0) return {0, 0};
    return {static_cast<u64>(k), order};
  }
  cplx operator()(u64 residue) const { return value(residue).as_complex(); }
};

class FFCharacterGroup {
 public:
  static constexpr u64 kMaxGroupOrder = 1000000;

  explicit FFCharacterGroup(const FqPoly& A) : ring_(std::make_shared<const ResidueRing>(A)) {
    const ResidueRing& R = *ring_;
    const u64 S = R.size();
    unit_.assign(S, false);
    for (u64 x = 0; x < S; ++x) {
      if (x == 0) continue;
      if (gcd(R.poly(x), A).degree() == 0) {
        unit_[x] = true;
        units_.push_back(x);
      }
    }
    const u64 N = units_.size();
    if (N > kMaxGroupOrder) throw CapacityError("FFCharacterGroup: unit group order exceeds 10^6");
    build_basis();
    build_coordinates();
  }

  const ResidueRing& ring() const noexcept { return *ring_; }
  const FqPoly& modulus() const noexcept { return ring_->modulus(); }
  u64 order() const noexcept { return units_.size(); }
  const std::vector<u64>& units() const noexcept { return units_; }
  bool is_unit(u64 x) const { return unit_[x]; }
  const std::vector<u64>& basis() const noexcept { return basis_; }
  const std::vector<u64>& basis_orders() const noexcept { return orders_; }
  // Coordinates of a unit against the basis.
  const u64* coords(u64 x) const { return &coords_[x * basis_.size()]; }

  std::size_t size() const noexcept { return units_.size(); }

  // Character with the given index in lexicographic exponent-vector order;
  // index 0 is the trivial character.
  FFCharacter character(std::size_t index) const {
    if (index >= units_.size()) throw ArgumentError("FFCharacterGroup: character index out of range");
    std::vector<u64> e(basis_.size());
    std::size_t rem = index;
    for (std::size_t i = basis_.size(); i-- > 0;) {
      e[i] = rem % orders_[i];
      rem /= orders_[i];
    }
    return make(index, std::move(e));
  }

  std::vector<FFCharacter> characters() const {
    std::vector<FFCharacter> out;
    out.reserve(units_.size());
    for (std::size_t i = 0; i < units_.size(); ++i) out.push_back(character(i));
    return out;
  }

 private:
  FFCharacter make(std::size_t index, std::vector<u64> e) const {
    FFCharacter chi;
    chi.modulus = ring_->modulus();
    chi.index = index;
    u64 ord = 1;
    for (std::size_t i = 0; i < e.size(); ++i) ord = std::lcm(ord, orders_[i] / gcd64(e[i], orders_[i]));
    chi.order = ord;
    auto table = std::make_shared<std::vector<i64>>(ring_->size(), -1);
    for (u64 x : units_) {
      const u64* c = coords(x);
      u64 k = 0;
      for (std::size_t i = 0; i < e.size(); ++i) {
        const u64 g = gcd64(e[i], orders_[i]);
        const u64 den = orders_[i] / g;
        const u64 num = (e[i] / g) * c[i] % den;
        k = (k + num * (ord / den)) % ord;
      }
      (*table)[x] = static_cast<i64>(k);
    }
    chi.is_even = true;
    for (u64 c = 1; c < ring_->q(); ++c)
      if ((*table)[c] != 0) chi.is_even = false;
    chi.exponents = std::move(e);
    chi.table = std::move(table);
    return chi;
  }

  // Greedy basis of each Sylow subgroup: take an element of maximal order
  // modulo the span H so far, then correct it so its cyclic group meets H
  // trivially.
  void build_basis() {
    const ResidueRing& R = *ring_;
    const u64 N = units_.size();
    for (auto [l, a] : factorize(N)) {
      u64 la = 1;
      for (int i = 0; i < a; ++i) la *= l;
      const u64 cof = N / la;
      std::vector<bool> in_sylow(R.size(), false);
      std::vector<u64> sylow;
      for (u64 x : units_) {
        const u64 y = R.pow(x, cof);
        if (!in_sylow[y]) {
          in_sylow[y] = true;
          sylow.push_back(y);
        }
      }
      std::sort(sylow.begin(), sylow.end());
      // H as a lookup table: residue -> position, plus coordinates per element.
      std::vector<i64> hpos(R.size(), -1);
      std::vector<u64> helems{R.one()};
      std::vector<std::vector<u64>> hcoords{{}};
      hpos[R.one()] = 0;
      std::vector<u64> lbasis, lorders;
      while (helems.size() < la) {
        u64 best = 0, best_ord = 0;
        for (u64 y : sylow) {
          u64 z = y, o = 1;
          while (hpos[z] < 0) {
            z = R.pow(z, l);
            o *= l;
          }
          if (o > best_ord) {
            best_ord = o;
            best = y;
          }
        }
        const auto& c = hcoords[static_cast<std::size_t>(hpos[R.pow(best, best_ord)])];
        u64 y = best;
        for (std::size_t i = 0; i < lbasis.size(); ++i) {
          if (c[i] % best_ord) throw IntegrityError("FFCharacterGroup: basis correction failed");
          const u64 k = (lorders[i] - (c[i] / best_ord) % lorders[i]) % lorders[i];
          y = R.mul(y, R.pow(lbasis[i], k));
        }
        // Extend H by <y>, which has order best_ord and meets H trivially.
        const std::size_t old = helems.size();
        u64 yk = R.one();
        for (u64 k = 1; k < best_ord; ++k) {
          yk = R.mul(yk, y);
          for (std::size_t h = 0; h < old; ++h) {
            const u64 e = R.mul(helems[h], yk);
            if (hpos[e] >= 0) throw IntegrityError("FFCharacterGroup: basis element not independent");
            hpos[e] = static_cast<i64>(helems.size());
            helems.push_back(e);
            auto cc = hcoords[h];
            cc.push_back(k);
            hcoords.push_back(std::move(cc));
          }
        }
        for (std::size_t h = 0; h < old; ++h) hcoords[h].push_back(0);
        lbasis.push_back(y);
        lorders.push_back(best_ord);
      }
      basis_.insert(basis_.end(), lbasis.begin(), lbasis.end());
      orders_.insert(orders_.end(), lorders.begin(), lorders.end());
    }
  }

  void build_coordinates() {
    const ResidueRing& R = *ring_;
    const std::size_t r = basis_.size();
    coords_.assign(R.size() * std::max<std::size_t>(r, 1), 0);
    std::vector<bool> seen(R.size(), false);
    std::vector<u64> k(r, 0);
    std::vector<u64> partial(r + 1, R.one());  // partial[j + 1] = partial[j] * b_j^{k_j}
    u64 count = 0;
    while (true) {
      const u64 x = partial[r];
      if (seen[x]) throw IntegrityError("FFCharacterGroup: basis is not independent");
      seen[x] = true;
      ++count;
      for (std::size_t i = 0; i < r; ++i) coords_[x * r + i] = k[i];
      std::ptrdiff_t i = static_cast<std::ptrdiff_t>(r) - 1;
      while (i >= 0 && ++k[i] == orders_[i]) k[i--] = 0;
      if (i < 0) break;
      for (std::size_t j = static_cast<std::size_t>(i); j < r; ++j) partial[j + 1] = R.mul(partial[j], R.pow(basis_[j], k[j]));
    }
    if (count != units_.size()) throw IntegrityError("FFCharacterGroup: basis does not span the unit group");
  }

  std::shared_ptr<const ResidueRing> ring_;
  std::vector<bool> unit_;
  std::vector<u64> units_;
  std::vector<u64> basis_;
  std::vector<u64> orders_;
  std::vector<u64> coords_;
};

inline std::vector<FFCharacter> character_group(const FqPoly& A) { return FFCharacterGroup(A).characters(); }

// ---------------------------------------------------------------------------
// Place census: how many monic irreducibles of each degree fall in each
// residue class, for many moduli at once.
// ---------------------------------------------------------------------------

struct PlaceCensus {
  u64 q = 0;
  int max_degree = 0;
  std::vector<FqPoly> moduli;
  std::vector<u64> place_counts;                       // [d]
  std::vector<std::vector<std::vector<u64>>> counts;  // [modulus][d][residue]
};

namespace detail {

struct CensusModulus {
  const ResidueRing* ring;
  std::vector<u64> tpow;    // residue of T^i, i = 0..D
  std::vector<u32> add;     // addition table, empty for large rings
  std::vector<u64> lowtab;  // residue of each polynomial with J digits
  u64 radd(u64 x, u64 y) const { return add.empty() ? ring->add(x, y) : add[x * ring->size() + y]; }
};

// Places of one degree n split as T^n + c T^j + off with off < q^j; the chunk
// c fixes a common offset residue, the low part is a table lookup.
struct DegreeChunks {
  std::vector<std::uint16_t> off;
  std::vector<std::pair<u64, std::size_t>> starts;  // (chunk, first place)
};

}  // namespace detail

inline PlaceCensus place_census(u64 q, int D, const std::vector<FqPoly>& moduli, unsigned threads = default_threads()) {
  PlaceCensus pc;
  pc.q = q;
  pc.max_degree = D;
  pc.moduli = moduli;
  pc.place_counts.assign(static_cast<std::size_t>(std::max(D, 0)) + 1, 0);
  std::vector<ResidueRing> rings;
  rings.reserve(moduli.size());
  for (const auto& A : moduli) {
    if (A.q() != q) throw ArgumentError("place_census: modulus over a different field");
    rings.emplace_back(A);
  }
  pc.counts.resize(moduli.size());
  for (std::size_t a = 0; a < moduli.size(); ++a)
    pc.counts[a].assign(static_cast<std::size_t>(std::max(D, 0)) + 1, std::vector<u64>(rings[a].size(), 0));
  if (D < 1) return pc;

  constexpr u64 kAddTableMax = 256;
  constexpr u64 kChunkMax = 4096;
  int J = 1;
  while (J < D && checked_power(q, J + 1, u64{1} << 62, "place_census") <= kChunkMax) ++J;
  std::vector<u64> qpow(static_cast<std::size_t>(D) + 1, 1);
  for (int i = 1; i <= D; ++i) qpow[i] = qpow[i - 1] * q;

  std::vector<detail::CensusModulus> cm(moduli.size());
  parallel_blocks(moduli.size(), threads, [&](std::size_t a) {
    const ResidueRing& R = rings[a];
    auto& c = cm[a];
    c.ring = &R;
    c.tpow.resize(static_cast<std::size_t>(D) + 1);
    for (int i = 0; i <= D; ++i) c.tpow[i] = R.reduce(FqPoly::monomial(q, i));
    if (R.size() <= kAddTableMax) {
      c.add.resize(R.size() * R.size());
      for (u64 x = 0; x < R.size(); ++x)
        for (u64 y = 0; y < R.size(); ++y) c.add[x * R.size() + y] = static_cast<u32>(R.add(x, y));
    }
    c.lowtab.assign(qpow[J], 0);
    for (u64 off = 1; off < qpow[J]; ++off) {
      int t = 0;
      while ((off / qpow[t]) % q == 0) ++t;
      c.lowtab[off] = c.radd(c.lowtab[off - qpow[t]], c.tpow[t]);
    }
  });

  auto flush = [&](int n, const detail::DegreeChunks& ch) {
    const int j = std::min(n, J);
    parallel_blocks(moduli.size(), threads, [&](std::size_t a) {
      const auto& c = cm[a];
      auto& cnt = pc.counts[a][n];
      // residue of T^n + chunk * T^j, advanced one chunk at a time
      u64 h = c.tpow[n];
      u64 chunk = 0;
      std::vector<u64> digits(static_cast<std::size_t>(n - j), 0);
      for (std::size_t b = 0; b < ch.starts.size(); ++b) {
        const auto [target, first] = ch.starts[b];
        const std::size_t last = b + 1 < ch.starts.size() ? ch.starts[b + 1].second : ch.off.size();
        for (; chunk < target; ++chunk)
          for (std::size_t i = 0;; ++i) {
            h = c.radd(h, c.tpow[static_cast<std::size_t>(j) + i]);
            if (++digits[i] < q) break;
            digits[i] = 0;
          }
        if (!c.add.empty()) {
          const u32* row = &c.add[h * c.ring->size()];
          for (std::size_t i = first; i < last; ++i) ++cnt[row[c.lowtab[ch.off[i]]]];
        } else {
          for (std::size_t i = first; i < last; ++i) ++cnt[c.ring->add(h, c.lowtab[ch.off[i]])];
        }
      }
    });
  };

  int cur_n = 0;
  detail::DegreeChunks ch;
  for_each_irreducible(q, D, [&](int n, u64 idx) {
    if (n != cur_n) {
      if (cur_n) flush(cur_n, ch);
      cur_n = n;
      ch.off.clear();
      ch.starts.clear();
    }
    ++pc.place_counts[n];
    const u64 width = qpow[std::min(n, J)];
    const u64 chunk = idx / width;
    if (ch.starts.empty() || ch.starts.back().first != chunk) ch.starts.emplace_back(chunk, ch.off.size());
    ch.off.push_back(static_cast<std::uint16_t>(idx - chunk * width));
  });
  if (cur_n) flush(cur_n, ch);
  return pc;
}

inline std::size_t census_slot(const PlaceCensus& pc, const FqPoly& A) {
  for (std::size_t i = 0; i < pc.moduli.size(); ++i)
    if (pc.moduli[i] == A) return i;
  throw ArgumentError("census does not cover modulus " + A.to_string());
}

// ---------------------------------------------------------------------------
// L-polynomials.
// ---------------------------------------------------------------------------

namespace detail {

// Coefficients of the ord-th cyclotomic polynomial, lowest first.
inline const std::vector<i64>& cyclotomic_polynomial(u64 ord) {
  static std::recursive_mutex mu;
  static std::map<u64, std::vector<i64>> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(ord); it != cache.end()) return it->second;
  std::vector<i64> p(ord + 1, 0);
  p[0] = -1;
  p[ord] = 1;
  for (u64 d = 1; d < ord; ++d) {
    if (ord % d) continue;
    const auto& f = cyclotomic_polynomial(d);
    const std::size_t m = f.size() - 1;
    std::vector<i64> quot(p.size() - m, 0);
    for (std::size_t k = p.size(); k-- > m;) {
      const i64 c = p[k];
      quot[k - m] = c;
      if (c)
        for (std::size_t i = 0; i <= m; ++i) p[k - m + i] -= c * f[i];
    }
    p = std::move(quot);
  }
  return cache.emplace(ord, std::move(p)).first->second;
}

inline constexpr u64 kExactCyclotomicOrder = 1024;

// sum_j n_j zeta_ord^j. Small orders reduce modulo the cyclotomic polynomial
// in integers first, so the cancellation between large counts is exact;
// larger orders subtract the integer mean.
inline cplx cyclotomic_sum(const std::vector<i64>& n, u64 ord) {
  if (ord == 1) return static_cast<double>(n[0]);
  ComplexKahanSum acc;
  if (ord <= kExactCyclotomicOrder) {
    const auto& phi = cyclotomic_polynomial(ord);
    const std::size_t m = phi.size() - 1;
    std::vector<i128> c(n.begin(), n.end());
    for (std::size_t k = ord; k-- > m;) {
      const i128 v = c[k];
      if (v)
        for (std::size_t i = 0; i <= m; ++i) c[k - m + i] -= v * phi[i];
    }
    for (std::size_t j = 0; j < m; ++j)
      if (c[j]) acc.add(static_cast<double>(c[j]) * CharacterValue::root_of_unity(j, ord));
    return acc.value();
  }
  i128 total = 0;
  for (i64 v : n) total += v;
  const i64 mean = static_cast<i64>(total / static_cast<i128>(ord));
  for (u64 j = 0; j < ord; ++j) {
    const i64 v = n[j] - mean;
    if (v) acc.add(static_cast<double>(v) * CharacterValue::root_of_unity(j, ord));
  }
  return acc.value();
}

inline cplx horner(const std::vector<cplx>& c, cplx z) {
  cplx v = 0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * z + c[i];
  return v;
}

}  // namespace detail

// Roots of a monic polynomial given by coefficients a[0..n] (a[n] = 1, lowest
// first): Aberth iteration, Newton polish, then averaging of clusters that
// represent one multiple root.
inline std::vector<cplx> polynomial_roots(const std::vector<cplx>& a) {
  const int n = static_cast<int>(a.size()) - 1;
  if (n < 1) return {};
  if (n == 1) return {-a[0] / a[1]};
  std::vector<cplx> da(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) da[i - 1] = a[i] * static_cast<double>(i);
  double bound = 0;
  for (int i = 0; i < n; ++i) bound = std::max(bound, std::abs(a[i] / a[n]));
  const double R = 1.0 + bound;
  std::vector<cplx> z(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) z[k] = std::polar(0.5 * R, 2.0 * kPi * k / n + 0.4);
  for (int it = 0; it < 2000; ++it) {
    double change = 0;
    for (int k = 0; k < n; ++k) {
      const cplx p = detail::horner(a, z[k]);
      const cplx dp = detail::horner(da, z[k]);
      if (p == cplx{0, 0}) continue;
      const cplx w = p / dp;
      cplx s = 0;
      for (int j = 0; j < n; ++j)
        if (j != k) s += 1.0 / (z[k] - z[j]);
      const cplx step = w / (1.0 - w * s);
      z[k] -= step;
      change = std::max(change, std::abs(step) / std::max(1.0, std::abs(z[k])));
    }
    if (change < 1e-16) break;
  }
  for (auto& r : z) {
    for (int it = 0; it < 3; ++it) {
      const cplx dp = detail::horner(da, r);
      if (std::abs(dp) < 1e-8 * std::max(1.0, std::abs(r))) break;
      const cplx step = detail::horner(a, r) / dp;
      if (!(std::abs(step) < 1e-6 * std::max(1.0, std::abs(r)))) break;
      r -= step;
    }
  }
  // cluster averaging
  std::vector<int> group(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (group[i] >= 0) continue;
    group[i] = i;
    for (int j = i + 1; j < n; ++j)
      if (group[j] < 0 && std::abs(z[i] - z[j]) < 1e-5 * std::max(1.0, std::abs(z[i]))) group[j] = i;
  }
  std::vector<cplx> out(z);
  for (int i = 0; i < n; ++i) {
    cplx s = 0;
    int c = 0;
    for (int j = 0; j < n; ++j)
      if (group[j] == group[i]) {
        s += z[j];
        ++c;
      }
    out[i] = s / static_cast<double>(c);
  }
  // a root of multiplicity c is a simple root of the (c-1)-th derivative
  for (int i = 0; i < n; ++i) {
    if (group[i] != i) continue;
    int c = 0;
    for (int j = 0; j < n; ++j) c += group[j] == i;
    if (c == 1) continue;
    std::vector<cplx> d0(a);
    for (int k = 0; k < c - 1; ++k) {
      for (std::size_t t = 1; t < d0.size(); ++t) d0[t - 1] = d0[t] * static_cast<double>(t);
      d0.pop_back();
    }
    std::vector<cplx> d1(d0.size() - 1);
    for (std::size_t t = 1; t < d0.size(); ++t) d1[t - 1] = d0[t] * static_cast<double>(t);
    cplx r = out[i];
    for (int it = 0; it < 8; ++it) {
      const cplx dp = detail::horner(d1, r);
      if (dp == cplx{0, 0}) break;
      const cplx step = detail::horner(d0, r) / dp;
      if (!(std::abs(step) < 1e-4 * std::max(1.0, std::abs(r)))) break;
      r -= step;
      if (std::abs(step) < 1e-17 * std::max(1.0, std::abs(r))) break;
    }
    for (int j = 0; j < n; ++j)
      if (group[j] == i) out[j] = r;
  }
  return out;
}

struct LPolynomial {
  u64 q = 0;
  std::vector<cplx> coeffs;  // c_0 .. c_deg, L(u) = sum c_n u^n
  std::vector<cplx> roots;   // inverse roots: L(u) = prod (1 - lambda u)
  int nu_sqrtq = 0;          // multiplicity of lambda = sqrt(q)
  int r_half = 0;            // order of vanishing of L at u = q^{-1/2}
  double weight_error = 0;   // max_lambda min(| |lambda| - 1 |, | |lambda| - sqrt q |)
  std::vector<cplx> vanishing_check;  // c_n for n >= deg A, should be 0

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  cplx operator()(cplx u) const { return detail::horner(coeffs, u); }

  // d^r/ds^r L(q^{-s}) = sum c_n (-n log q)^r q^{-ns}.
  cplx derivative_s(int r, cplx s) const {
    const double lq = std::log(static_cast<double>(q));
    ComplexKahanSum acc;
    for (std::size_t n = 0; n < coeffs.size(); ++n) {
      const cplx u = std::exp(-s * lq * static_cast<double>(n));
      acc.add(coeffs[n] * std::pow(-static_cast<double>(n) * lq, r) * u);
    }
    return acc.value();
  }
};

namespace detail {

// Order of vanishing at z of sum c_n z^n by successive Taylor coefficients.
inline int vanishing_order(const std::vector<cplx>& c, cplx z, double tol) {
  const int n = static_cast<int>(c.size()) - 1;
  for (int k = 0; k <= n; ++k) {
    ComplexKahanSum val;
    double scale = 0;
    for (int i = k; i <= n; ++i) {
      double binom = 1;
      for (int t = 0; t < k; ++t) binom = binom * (i - t) / (t + 1);
      const cplx term = c[i] * binom * std::pow(z, i - k);
      val.add(term);
      scale += std::abs(term);
    }
    if (std::abs(val.value()) > tol * std::max(scale, 1e-300)) return k;
  }
  return n;
}

}  // namespace detail

inline LPolynomial l_polynomial_from_coefficients(u64 q, std::vector<cplx> coeffs) {
  if (coeffs.empty() || std::abs(coeffs[0] - 1.0) > 1e-12) throw ArgumentError("L-polynomial must have c_0 = 1");
  const double tol = 1e-9;
  while (coeffs.size() > 1 && std::abs(coeffs.back()) < tol) coeffs.pop_back();
  LPolynomial L;
  L.q = q;
  L.coeffs = coeffs;
  const int d = L.degree();
  // inverse roots are the roots of z^d L(1/z) = sum c_n z^{d - n}
  std::vector<cplx> rev(static_cast<std::size_t>(d) + 1);
  for (int n = 0; n <= d; ++n) rev[d - n] = coeffs[n];
  L.roots = polynomial_roots(rev);
  const double sq = std::sqrt(static_cast<double>(q));
  for (const auto& lam : L.roots) {
    const double m = std::abs(lam);
    L.weight_error = std::max(L.weight_error, std::min(std::abs(m - 1.0), std::abs(m - sq)));
  }
  L.nu_sqrtq = d ? detail::vanishing_order(rev, cplx{sq, 0}, 1e-8) : 0;
  L.r_half = d ? detail::vanishing_order(coeffs, cplx{1.0 / sq, 0}, 1e-8) : 0;
  return L;
}

// Per exponent class j, the number of monic f of degree n with chi(f) = zeta^j.
inline std::vector<std::vector<i64>> degree_class_counts(const FFCharacter& chi, int nmax) {
  const ResidueRing R(chi.modulus);
  const int m = R.degree();
  std::vector<std::vector<i64>> cnt(static_cast<std::size_t>(nmax) + 1, std::vector<i64>(chi.order, 0));
  for (int n = 0; n <= nmax; ++n) {
    const u64 total = checked_power(chi.modulus.q(), n, u64{1} << 34, "degree_class_counts");
    if (n < m) {
      for (u64 idx = 0; idx < total; ++idx) {
        const i64 e = chi.exponent(idx + R.qpow(n));
        if (e >= 0) ++cnt[n][static_cast<std::size_t>(e)];
      }
    } else {
      // reduce each monic f of degree n; only needed for the vanishing check
      for (u64 idx = 0; idx < total; ++idx) {
        const i64 e = chi.exponent(R.reduce(FqPoly::from_monic_index(chi.modulus.q(), n, idx)));
        if (e >= 0) ++cnt[n][static_cast<std::size_t>(e)];
      }
    }
  }
  return cnt;
}

// c_n = sum_{f monic, deg f = n} chi(f), n < deg A, plus c_{deg A} as a check.
inline LPolynomial l_polynomial(const FFCharacter& chi) {
  if (chi.is_trivial()) throw ArgumentError("l_polynomial: trivial character (zeta factor has a pole)");
  const int m = chi.modulus.degree();
  const auto cnt = degree_class_counts(chi, m);
  std::vector<cplx> c;
  for (int n = 0; n < m; ++n) c.push_back(detail::cyclotomic_sum(cnt[n], chi.order));
  auto L = l_polynomial_from_coefficients(chi.modulus.q(), c);
  L.vanishing_check.push_back(detail::cyclotomic_sum(cnt[m], chi.order));
  return L;
}

// Distinct monic irreducible factors of A by trial division.
inline std::vector<FqPoly> irreducible_factors(FqPoly A) {
  std::vector<FqPoly> out;
  const u64 q = A.q();
  for (int d = 1; 2 * d <= A.degree(); ++d) {
    const u64 total = checked_power(q, d, u64{1} << 30, "irreducible_factors");
    for (u64 idx = 0; idx < total && 2 * d <= A.degree(); ++idx) {
      const FqPoly f = FqPoly::from_monic_index(q, d, idx);
      if ((A % f).is_zero()) {
        out.push_back(f);
        while ((A % f).is_zero()) A = A / f;
      }
    }
  }
  if (A.degree() >= 1) out.push_back(A.make_monic());
  std::sort(out.begin(), out.end(), [](const FqPoly& x, const FqPoly& y) {
    return x.degree() != y.degree() ? x.degree() < y.degree() : x.coeffs() < y.coeffs();
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Trace formula: sum_{deg v | l} deg v chi(v)^{l / deg v} = -sum lambda^l.
// ---------------------------------------------------------------------------

struct TraceCheck {
  std::vector<cplx> lhs;  // [l], l = 1..lmax (index 0 unused)
  std::vector<cplx> rhs;
  double max_residual = 0;
};

inline cplx trace_lhs(const FFCharacter& chi, const PlaceCensus& pc, std::size_t slot, int l) {
  std::vector<i64> n(chi.order, 0);
  const auto& counts = pc.counts[slot];
  for (int d = 1; d <= l; ++d) {
    if (l % d) continue;
    const u64 power = static_cast<u64>(l / d);
    for (u64 r = 0; r < counts[d].size(); ++r) {
      if (!counts[d][r]) continue;
      const i64 e = chi.exponent(r);
      if (e < 0) continue;
      n[static_cast<std::size_t>(static_cast<u64>(e) * power % chi.order)] += d * static_cast<i64>(counts[d][r]);
    }
  }
  return detail::cyclotomic_sum(n, chi.order);
}

inline TraceCheck trace_formula_check(const FFCharacter& chi, int lmax, const PlaceCensus& pc, std::size_t slot,
                                      const LPolynomial* L = nullptr) {
  if (lmax > pc.max_degree) throw RangeError("trace_formula_check: census degree below lmax");
  TraceCheck tc;
  tc.lhs.assign(static_cast<std::size_t>(lmax) + 1, 0.0);
  tc.rhs.assign(static_cast<std::size_t>(lmax) + 1, 0.0);
  std::optional<LPolynomial> own;
  std::vector<FqPoly> ramified;
  if (chi.is_trivial()) {
    ramified = irreducible_factors(chi.modulus);
  } else if (!L) {
    own = l_polynomial(chi);
    L = &*own;
  }
  const double q = static_cast<double>(chi.modulus.q());
  for (int l = 1; l <= lmax; ++l) {
    tc.lhs[l] = trace_lhs(chi, pc, slot, l);
    if (chi.is_trivial()) {
      // L(u, chi_0) = prod_{P | A} (1 - u^{deg P}) / (1 - q u)
      double r = std::pow(q, l);
      for (const auto& P : ramified)
        if (l % P.degree() == 0) r -= P.degree();
      tc.rhs[l] = r;
    } else {
      cplx s = 0;
      for (const auto& lam : L->roots) s += std::pow(lam, l);
      tc.rhs[l] = -s;
    }
    tc.max_residual = std::max(tc.max_residual, std::abs(tc.lhs[l] - tc.rhs[l]));
  }
  return tc;
}

inline TraceCheck trace_formula_check(const FFCharacter& chi, int lmax) {
  const auto pc = place_census(chi.modulus.q(), lmax, {chi.modulus});
  return trace_formula_check(chi, lmax, pc, 0);
}

// ---------------------------------------------------------------------------
// Partial products over places, the DRH ratio and Mertens sums.
// ---------------------------------------------------------------------------

// log prod_{deg v <= d} (1 - chi(v) q^{-s deg v})^{-1} for d = 0..D; the
// checkpoint of degree d is x = q^d.
inline ProductTrace ff_partial_product(const FFCharacter& chi, cplx s, int D, const PlaceCensus& pc, std::size_t slot) {
  if (D > pc.max_degree) throw RangeError("ff_partial_product: census degree below D");
  ProductTrace tr;
  tr.spec_label = "ff:q=" + std::to_string(chi.modulus.q()) + ":A=" + chi.modulus.to_string() + ":idx=" + std::to_string(chi.index);
  tr.s = s;
  const double lq = std::log(static_cast<double>(chi.modulus.q()));
  ComplexKahanSum acc;
  tr.checkpoints.push_back(1.0);
  tr.log_values.push_back(0.0);
  for (int d = 1; d <= D; ++d) {
    std::vector<i64> n(chi.order, 0);
    const auto& counts = pc.counts[slot][d];
    for (u64 r = 0; r < counts.size(); ++r) {
      const i64 e = chi.exponent(r);
      if (e >= 0) n[static_cast<std::size_t>(e)] += static_cast<i64>(counts[r]);
    }
    const cplx ud = std::exp(-s * lq * static_cast<double>(d));
    for (u64 j = 0; j < chi.order; ++j) {
      if (!n[j]) continue;
      const cplx w = CharacterValue::root_of_unity(j, chi.order) * ud;
      if (!(std::abs(w) < 1.0)) throw IntegrityError("ff_partial_product: |chi(v) N(v)^{-s}| >= 1 at degree " + std::to_string(d));
      tr.max_branch_modulus = std::max(tr.max_branch_modulus, std::abs(w));
      acc.add(-static_cast<double>(n[j]) * log1p_complex(-w));
    }
    tr.checkpoints.push_back(std::exp(lq * d));
    tr.log_values.push_back(acc.value());
  }
  for (const auto& l : tr.log_values) tr.normalized.push_back(std::exp(l));
  return tr;
}

inline ProductTrace ff_partial_product(const FFCharacter& chi, cplx s, int D) {
  const auto pc = place_census(chi.modulus.q(), D, {chi.modulus});
  return ff_partial_product(chi, s, D, pc, 0);
}

// sqrt(2)^nu L^(r)(1/2) / (e^{r gamma} r!).
inline cplx ff_drh_target(const LPolynomial& L, int r, int nu) {
  double fact = 1;
  for (int i = 2; i <= r; ++i) fact *= i;
  return std::pow(std::sqrt(2.0), nu) * L.derivative_s(r, {0.5, 0.0}) / (std::exp(r * kEulerGamma) * fact);
}

struct FFConvergenceReport {
  LPolynomial lpoly;
  int r = 0;              // vanishing order at the centre (= r_half)
  int nu = 0;             // exponent used for the target
  int nu_sqrtq = 0;       // multiplicity of lambda = sqrt(q)
  int nu_center = 0;      // m(chi^2): 1 iff chi^2 is trivial
  cplx target{0, 0};
  cplx target_nu_sqrtq{0, 0};
  std::vector<int> degrees;
  std::vector<cplx> ratio;          // R(D) against target
  std::vector<cplx> ratio_nu_sqrtq;  // R(D) with nu = nu_sqrtq
  std::vector<double> deviations;   // |R(D) - 1|
  double tail_max_dev = 0;          // over the last half of the degrees
  ProductTrace trace;
};

// R(D) = (D log q)^r P(q^D, 1/2) / target. The sqrt(2) exponent is m(chi^2),
// the order of the pole of the second-moment factor; the multiplicity of
// lambda = sqrt(q) is reported alongside.
inline FFConvergenceReport ff_drh_verify(const FFCharacter& chi, int D_max, const PlaceCensus& pc, std::size_t slot) {
  FFConvergenceReport rep;
  rep.lpoly = l_polynomial(chi);
  if (rep.lpoly.weight_error > 1e-8)
    throw IntegrityError("ff_drh_verify: inverse root of weight outside {0, 1} (| |lambda| - 1 or sqrt q | = " +
                         std::to_string(rep.lpoly.weight_error) + ")");
  rep.r = rep.lpoly.r_half;
  rep.nu_sqrtq = rep.lpoly.nu_sqrtq;
  rep.nu_center = chi.order <= 2 ? 1 : 0;
  rep.nu = rep.nu_center;
  rep.target = ff_drh_target(rep.lpoly, rep.r, rep.nu);
  rep.target_nu_sqrtq = ff_drh_target(rep.lpoly, rep.r, rep.nu_sqrtq);
  rep.trace = ff_partial_product(chi, {0.5, 0.0}, D_max, pc, slot);
  const double lq = std::log(static_cast<double>(chi.modulus.q()));
  for (int D = 1; D <= D_max; ++D) {
    const cplx P = std::exp(rep.trace.log_values[D] + static_cast<double>(rep.r) * std::log(D * lq));
    rep.degrees.push_back(D);
    rep.ratio.push_back(P / rep.target);
    rep.ratio_nu_sqrtq.push_back(P / rep.target_nu_sqrtq);
    rep.deviations.push_back(std::abs(P / rep.target - 1.0));
  }
  rep.trace.predicted_limit = rep.target;
  for (std::size_t i = rep.deviations.size() / 2; i < rep.deviations.size(); ++i)
    rep.tail_max_dev = std::max(rep.tail_max_dev, rep.deviations[i]);
  return rep;
}

inline FFConvergenceReport ff_drh_verify(const FFCharacter& chi, int D_max) {
  const auto pc = place_census(chi.modulus.q(), D_max, {chi.modulus});
  return ff_drh_verify(chi, D_max, pc, 0);
}

// T(q^D, chi) = sum_{deg v <= D} chi(v) q^{-deg v}.
inline BiasSeries ff_mertens(const FFCharacter& chi, int D_max, const PlaceCensus& pc, std::size_t slot) {
  BiasSeries out;
  out.label = "ff_mertens:q=" + std::to_string(chi.modulus.q()) + ":A=" + chi.modulus.to_string() + ":idx=" + std::to_string(chi.index);
  out.weight = 1;
  const double q = static_cast<double>(chi.modulus.q());
  ComplexKahanSum acc;
  for (int d = 1; d <= D_max; ++d) {
    std::vector<i64> n(chi.order, 0);
    const auto& counts = pc.counts[slot][d];
    for (u64 r = 0; r < counts.size(); ++r) {
      const i64 e = chi.exponent(r);
      if (e >= 0) n[static_cast<std::size_t>(e)] += static_cast<i64>(counts[r]);
    }
    acc.add(detail::cyclotomic_sum(n, chi.order) * std::pow(q, -d));
    out.checkpoints.push_back(std::pow(q, d));
    out.values.push_back(acc.value().real());
    if (chi.order > 2) out.imag_values.push_back(acc.value().imag());
  }
  return out;
}

// Trivial representation over all places; ratios hold T - log(D log q).
inline BiasSeries ff_mertens_trivial(u64 q, int D_max) {
  BiasSeries out;
  out.label = "ff_mertens:q=" + std::to_string(q) + ":trivial";
  out.weight = 1;
  std::vector<u64> count(static_cast<std::size_t>(std::max(D_max, 0)) + 1, 0);
  for_each_irreducible(q, D_max, [&](int n, u64) { ++count[n]; });
  KahanSum acc;
  const double lq = std::log(static_cast<double>(q));
  for (int d = 1; d <= D_max; ++d) {
    acc.add(static_cast<double>(count[d]) * std::pow(static_cast<double>(q), -d));
    out.checkpoints.push_back(std::pow(static_cast<double>(q), d));
    out.values.push_back(acc.value());
    out.ratios.push_back(acc.value() - std::log(d * lq));
  }
  return out;
}

}  // namespace drh::ff
