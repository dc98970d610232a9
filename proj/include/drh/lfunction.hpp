#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drh/dirichlet.hpp"
#include "drh/elliptic.hpp"
#include "drh/tau.hpp"

namespace drh {

inline constexpr int kMaxDegree = 4;

// Writes the arithmetically normalized inverse roots at p into alpha and
// returns how many there are (ramified primes may have fewer than d).
using SatakeProvider = std::function<int(u64 p, cplx* alpha)>;

struct LFunctionSpec {
  int degree = 1;
  std::string label;
  SatakeProvider local_provider;
  double normalization_shift = 0;  // the unitary parameters are alpha / p^shift
  int nu = 0;
  int vanishing_order = 0;
  std::optional<std::vector<double>> gamma_params;
  std::optional<u64> conductor;

  // Unitary-normalized parameters alpha_j(p) / p^shift.
  int satake(u64 p, cplx* out) const {
    const int n = local_provider(p, out);
    if (normalization_shift != 0) {
      const double scale = std::pow(static_cast<double>(p), -normalization_shift);
      for (int j = 0; j < n; ++j) out[j] *= scale;
    }
    return n;
  }
  std::vector<cplx> satake(u64 p) const {
    cplx buf[kMaxDegree];
    const int n = satake(p, buf);
    return {buf, buf + n};
  }
};

struct SatakeAngle {
  u64 p;
  double theta;
};

namespace detail {

// Conjugate pair with sum t and product m (arithmetic normalization).
inline int quadratic_pair(double t, double m, cplx* out) {
  const cplx disc = std::sqrt(cplx{t * t - 4.0 * m, 0.0});
  out[0] = (t + disc) / 2.0;
  out[1] = (t - disc) / 2.0;
  return 2;
}

}  // namespace detail

inline LFunctionSpec zeta_spec() {
  LFunctionSpec s;
  s.degree = 1;
  s.label = "zeta";
  s.local_provider = [](u64, cplx* a) {
    a[0] = 1.0;
    return 1;
  };
  s.gamma_params = std::vector<double>{0.0};
  s.conductor = 1;
  return s;
}

inline LFunctionSpec dirichlet_spec(u64 q, std::size_t index) {
  auto chi = std::make_shared<const DirichletCharacter>(character_by_index(q, index));
  LFunctionSpec s;
  s.degree = 1;
  s.label = "dirichlet:q=" + std::to_string(q) + ":idx=" + std::to_string(index);
  s.local_provider = [chi](u64 p, cplx* a) {
    const auto v = chi->value(p);
    if (v.is_zero()) return 0;
    a[0] = v.as_complex();
    return 1;
  };
  s.nu = chi->is_trivial() ? 0 : nu_exponent(*chi);
  s.gamma_params = std::vector<double>{chi->is_even() ? 0.0 : 1.0};
  s.conductor = chi->conductor();
  return s;
}

// Ramanujan Delta: x^2 - tau(p) x + p^11 at every p, shift 11/2. The sqrt(2)
// exponent is m(sym^2) - m(wedge^2) = 0 - 1.
inline LFunctionSpec delta_spec(std::shared_ptr<const TauTable> tau) {
  LFunctionSpec s;
  s.degree = 2;
  s.label = "delta";
  s.local_provider = [tau](u64 p, cplx* a) {
    if (p > tau->N()) throw RangeError("delta_spec: p = " + std::to_string(p) + " beyond tau table");
    return detail::quadratic_pair(static_cast<double>((*tau)(p)), std::pow(static_cast<double>(p), 11.0), a);
  };
  s.normalization_shift = 5.5;
  s.nu = -1;
  s.gamma_params = std::vector<double>{5.5, 6.5};
  s.conductor = 1;
  return s;
}

// Elliptic curve L: x^2 - a_p x + p at good p, the single root a_p at bad p
// (absent when a_p = 0). a_p is tabulated up to limit and computed beyond.
inline LFunctionSpec elliptic_spec(const EllipticCurve& E, std::shared_ptr<const ApTable> table) {
  LFunctionSpec s;
  s.degree = 2;
  s.label = E.label();
  s.local_provider = [E, table](u64 p, cplx* a) {
    i64 ap;
    const auto it = table ? std::lower_bound(table->primes.begin(), table->primes.end(), p) : std::vector<u64>::const_iterator{};
    if (table && it != table->primes.end() && *it == p)
      ap = table->ap[static_cast<std::size_t>(it - table->primes.begin())];
    else
      ap = count_points_ap(E, p);
    if (E.is_bad(p)) {
      if (ap == 0) return 0;
      a[0] = static_cast<double>(ap);
      return 1;
    }
    return detail::quadratic_pair(static_cast<double>(ap), static_cast<double>(p), a);
  };
  s.normalization_shift = 0.5;
  s.nu = -1;
  s.gamma_params = std::vector<double>{0.5, 1.5};
  return s;
}

// prod_j (1 - alpha_j(p) p^{-s})^{-1} with unitary-normalized alpha.
inline cplx local_factor(const LFunctionSpec& spec, u64 p, cplx s) {
  if (!(s.real() > 0)) throw DomainError("local_factor: need Re(s) > 0");
  cplx a[kMaxDegree];
  const int n = spec.satake(p, a);
  const cplx ps = std::exp(-s * std::log(static_cast<double>(p)));
  cplx f = 1.0;
  for (int j = 0; j < n; ++j) {
    const cplx d = 1.0 - a[j] * ps;
    if (std::abs(d) < 1e-300) throw SingularityError("local_factor: vanishing denominator at p = " + std::to_string(p));
    f /= d;
  }
  return f;
}

inline cplx second_moment_factor(const LFunctionSpec& spec, u64 p, cplx s) {
  if (!(s.real() > 0)) throw DomainError("second_moment_factor: need Re(s) > 0");
  cplx a[kMaxDegree];
  const int n = spec.satake(p, a);
  const cplx ps = std::exp(-s * std::log(static_cast<double>(p)));
  cplx f = 1.0;
  for (int j = 0; j < n; ++j) {
    const cplx d = 1.0 - a[j] * a[j] * ps;
    if (std::abs(d) < 1e-300) throw SingularityError("second_moment_factor: vanishing denominator at p = " + std::to_string(p));
    f /= d;
  }
  return f;
}

// theta(p) = arccos(tau(p) / (2 p^{11/2})).
inline std::vector<SatakeAngle> satake_angles(const TauTable& tau, std::span<const u64> primes) {
  std::vector<SatakeAngle> out;
  out.reserve(primes.size());
  for (u64 p : primes) {
    const double c = tau_normalized(tau, p) / 2.0;
    if (std::abs(c) > 1.0 + 1e-12) throw IntegrityError("satake_angles: Deligne bound violated at p = " + std::to_string(p));
    out.push_back({p, std::acos(std::clamp(c, -1.0, 1.0))});
  }
  return out;
}

inline std::vector<SatakeAngle> satake_angles(const LFunctionSpec& delta, std::span<const u64> primes) {
  if (delta.label != "delta") throw ArgumentError("satake_angles: spec must be the delta entry");
  std::vector<SatakeAngle> out;
  for (u64 p : primes) {
    const auto a = delta.satake(p);
    const double c = (a[0] + a[1]).real() / 2.0;
    if (std::abs(c) > 1.0 + 1e-12) throw IntegrityError("satake_angles: Deligne bound violated at p = " + std::to_string(p));
    out.push_back({p, std::acos(std::clamp(c, -1.0, 1.0))});
  }
  return out;
}

// lambda(1..N) of the Dirichlet series: at p^k the complete homogeneous
// symmetric polynomial h_k of the unitary parameters, extended multiplicatively.
inline std::vector<cplx> dirichlet_coefficients(const LFunctionSpec& spec, std::size_t N) {
  std::vector<cplx> lam(N + 1, 0.0);
  if (N == 0) return lam;
  std::vector<u64> spf(N + 1, 0);
  for (u64 i = 2; i <= N; ++i)
    if (!spf[i])
      for (u64 j = i; j <= N; j += i)
        if (!spf[j]) spf[j] = i;
  lam[1] = 1.0;
  // h_k at prime powers
  std::vector<std::vector<cplx>> hp(N + 1);
  for (u64 p = 2; p <= N; ++p) {
    if (spf[p] != p) continue;
    const auto a = spec.satake(p);
    int kmax = 0;
    for (u64 pk = p; pk <= N; pk *= p) ++kmax;
    // h_k(a_1..a_d) via the generating function prod 1/(1 - a_j t)
    std::vector<cplx> h(static_cast<std::size_t>(kmax) + 1, 0.0);
    h[0] = 1.0;
    for (const cplx& aj : a)
      for (int k = 1; k <= kmax; ++k) h[k] += aj * h[k - 1];
    hp[p] = h;
  }
  for (u64 n = 2; n <= N; ++n) {
    const u64 p = spf[n];
    u64 m = n;
    int k = 0;
    while (m % p == 0) {
      m /= p;
      ++k;
    }
    lam[n] = lam[m] * hp[p][static_cast<std::size_t>(k)];
  }
  return lam;
}

// Parses catalog labels: zeta, dirichlet:q=Q:idx=I, delta, ec:a=A:b=B.
struct CatalogOptions {
  std::size_t tau_limit = 100000;
  u64 ap_limit = 0;
  std::shared_ptr<const PrimeTable> primes;
};

inline LFunctionSpec spec_from_label(const std::string& label, const CatalogOptions& opt = {}) {
  auto field = [&](const std::string& key) -> std::string {
    const auto pos = label.find(key + "=");
    if (pos == std::string::npos) throw ArgumentError("spec label '" + label + "' lacks " + key);
    const auto start = pos + key.size() + 1;
    return label.substr(start, label.find(':', start) - start);
  };
  auto to_i64 = [&](const std::string& v) -> i64 {
    std::size_t used = 0;
    i64 r = 0;
    try {
      r = std::stoll(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size()) throw ArgumentError("spec label '" + label + "': bad integer '" + v + "'");
    return r;
  };
  if (label == "zeta") return zeta_spec();
  if (label == "delta") return delta_spec(std::make_shared<const TauTable>(tau_table(opt.tau_limit)));
  if (label.rfind("dirichlet:", 0) == 0) {
    const i64 q = to_i64(field("q")), idx = to_i64(field("idx"));
    if (q < 1 || idx < 0) throw ArgumentError("spec label '" + label + "': q >= 1 and idx >= 0 required");
    return dirichlet_spec(static_cast<u64>(q), static_cast<std::size_t>(idx));
  }
  if (label.rfind("ec:", 0) == 0) {
    const EllipticCurve E(to_i64(field("a")), to_i64(field("b")));
    std::shared_ptr<const ApTable> table;
    if (opt.primes && opt.ap_limit >= 2)
      table = std::make_shared<const ApTable>(compute_ap_table(E, *opt.primes, std::min(opt.ap_limit, opt.primes->limit())));
    return elliptic_spec(E, table);
  }
  throw ArgumentError("unknown spec label '" + label + "'");
}

}  // namespace drh
