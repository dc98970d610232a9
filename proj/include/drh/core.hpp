#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace drh {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using i128 = __int128;
using u128 = unsigned __int128;
using cplx = std::complex<double>;

inline constexpr double kEulerGamma = 0.5772156649015329;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

// ---------------------------------------------------------------------------
// Errors. One exception type per failure class so callers (and the CLI) can
// react to each separately.
// ---------------------------------------------------------------------------

enum class ErrorKind {
  capacity,
  range,
  domain,
  argument,
  precision,
  singularity,
  integrity,
  overflow,
  inconsistency,
  fit,
  cache,
  io,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::range: return "range";
    case ErrorKind::domain: return "domain";
    case ErrorKind::argument: return "argument";
    case ErrorKind::precision: return "precision";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::integrity: return "integrity";
    case ErrorKind::overflow: return "overflow";
    case ErrorKind::inconsistency: return "inconsistency";
    case ErrorKind::fit: return "fit";
    case ErrorKind::cache: return "cache";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

template <ErrorKind K>
class KindError : public Error {
 public:
  explicit KindError(const std::string& what) : Error(K, what) {}
};

using CapacityError = KindError<ErrorKind::capacity>;
using RangeError = KindError<ErrorKind::range>;
using DomainError = KindError<ErrorKind::domain>;
using ArgumentError = KindError<ErrorKind::argument>;
using PrecisionError = KindError<ErrorKind::precision>;
using SingularityError = KindError<ErrorKind::singularity>;
using IntegrityError = KindError<ErrorKind::integrity>;
using OverflowError = KindError<ErrorKind::overflow>;
using InconsistencyError = KindError<ErrorKind::inconsistency>;
using FitError = KindError<ErrorKind::fit>;
using CacheError = KindError<ErrorKind::cache>;
using IoError = KindError<ErrorKind::io>;

// ---------------------------------------------------------------------------
// Compensated summation (Neumaier). Merging two accumulators in a fixed
// order gives bit-identical results independent of how work was scheduled.
// ---------------------------------------------------------------------------

class KahanSum {
 public:
  KahanSum() = default;
  explicit KahanSum(double v) : sum_(v) {}

  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  void merge(const KahanSum& other) noexcept {
    add(other.sum_);
    add(other.comp_);
  }

  KahanSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class ComplexKahanSum {
 public:
  void add(cplx z) noexcept {
    re_.add(z.real());
    im_.add(z.imag());
  }
  void merge(const ComplexKahanSum& o) noexcept {
    re_.merge(o.re_);
    im_.merge(o.im_);
  }
  ComplexKahanSum& operator+=(cplx z) noexcept {
    add(z);
    return *this;
  }
  cplx value() const noexcept { return {re_.value(), im_.value()}; }

 private:
  KahanSum re_;
  KahanSum im_;
};

// log(1 + w) without the cancellation of forming 1 + w first.
inline cplx log1p_complex(cplx w) {
  const double x = w.real();
  const double y = w.imag();
  const double re = 0.5 * std::log1p(2.0 * x + x * x + y * y);
  const double im = std::atan2(y, 1.0 + x);
  return {re, im};
}

// ---------------------------------------------------------------------------
// Threading. Work is cut into fixed blocks; the block layout never depends on
// the worker count, and results are combined by block index.
// ---------------------------------------------------------------------------

inline unsigned default_threads() {
  if (const char* env = std::getenv("DRH_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v <= 1024) return static_cast<unsigned>(v);
  }
  return 1;
}

// Runs fn(b) for every b in [0, nblocks). Blocks are statically striped over
// workers. Exceptions are rethrown on the calling thread (lowest block wins).
inline void parallel_blocks(std::size_t nblocks, unsigned threads,
                            const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || nblocks <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b) fn(b);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, nblocks));
  std::vector<std::exception_ptr> errors(nblocks);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t b = w; b < nblocks; b += workers) {
        try {
          fn(b);
        } catch (...) {
          errors[b] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Small integer helpers.
// ---------------------------------------------------------------------------

inline u64 mulmod64(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

inline u64 powmod64(u64 a, u64 e, u64 m) {
  u64 r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod64(r, a, m);
    a = mulmod64(a, a, m);
    e >>= 1;
  }
  return r;
}

inline u64 gcd64(u64 a, u64 b) {
  while (b) {
    const u64 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline i64 mod_floor(i64 a, i64 m) {
  const i64 r = a % m;
  return r < 0 ? r + m : r;
}

// Deterministic Miller-Rabin for all 64-bit inputs.
inline bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    u64 x = powmod64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod64(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

struct PrimePower {
  u64 p;
  int e;
};

inline std::vector<PrimePower> factorize(u64 n) {
  std::vector<PrimePower> f;
  for (u64 p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    f.push_back({p, e});
  }
  if (n > 1) f.push_back({n, 1});
  return f;
}

inline u64 euler_phi(u64 n) {
  u64 r = n;
  for (auto [p, e] : factorize(n)) r = r / p * (p - 1);
  return r;
}

inline int moebius(u64 n) {
  int m = 1;
  for (auto [p, e] : factorize(n)) {
    if (e > 1) return 0;
    m = -m;
  }
  return m;
}

// Geometric checkpoint grid rounded to integers, strictly ascending.
inline std::vector<double> geometric_checkpoints(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (!(lo > 0) || !(hi >= lo)) throw ArgumentError("geometric_checkpoints: need 0 < lo <= hi");
  // never ask for more points than there are integers in [lo, hi]
  const double available = std::floor(hi) - std::ceil(lo) + 1;
  if (available < 1) throw ArgumentError("geometric_checkpoints: no integer in [lo, hi]");
  if (static_cast<double>(count) > available) count = static_cast<std::size_t>(available);
  std::vector<double> xs;
  xs.reserve(count);
  if (count == 1) {
    xs.push_back(std::floor(hi));
    return xs;
  }
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    double x = std::floor(lo * std::exp(step * static_cast<double>(i)) + 1e-9);
    if (i + 1 == count) x = std::floor(hi);
    if (!xs.empty() && x <= xs.back()) x = xs.back() + 1;
    xs.push_back(x);
  }
  for (std::size_t i = 0; i < count; ++i) xs[i] = std::min(xs[i], std::floor(hi) - static_cast<double>(count - 1 - i));
  return xs;
}

}  // namespace drh
