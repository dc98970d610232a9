#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drh/core.hpp"

namespace drh {

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double residual = 0;  // RMS
};

// Checkpointed partial sums of a real series. imag_values and ratios are
// filled only by producers that have them.
struct BiasSeries {
  std::string label;
  double weight = 0;
  std::vector<double> checkpoints;
  std::vector<double> values;
  std::vector<double> imag_values;
  std::vector<double> ratios;
  std::optional<LineFit> fit;
};

// Checkpointed log partial products. s is the point after the normalization
// shift, so the critical line is Re(s) = 1/2 for every spec.
struct ProductTrace {
  std::string spec_label;
  cplx s{0.5, 0.0};
  std::vector<double> checkpoints;
  std::vector<cplx> log_values;
  std::vector<cplx> normalized;
  std::optional<cplx> predicted_limit;
  double max_branch_modulus = 0;  // max |alpha p^{-s}| seen while accumulating
};

// Ordinary least squares y = slope * t + intercept.
inline LineFit least_squares(std::span<const double> t, std::span<const double> y) {
  const std::size_t n = t.size();
  if (n < 2 || y.size() != n) throw FitError("least_squares: need at least two points");
  KahanSum st, sy;
  for (std::size_t i = 0; i < n; ++i) {
    st.add(t[i]);
    sy.add(y[i]);
  }
  const double tm = st.value() / n, ym = sy.value() / n;
  KahanSum stt, sty;
  for (std::size_t i = 0; i < n; ++i) {
    stt.add((t[i] - tm) * (t[i] - tm));
    sty.add((t[i] - tm) * (y[i] - ym));
  }
  const double spread = stt.value();
  if (!(spread > 1e-12 * std::max(1.0, tm * tm))) throw FitError("least_squares: degenerate design");
  LineFit f;
  f.slope = sty.value() / spread;
  f.intercept = ym - f.slope * tm;
  KahanSum rr;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (f.slope * t[i] + f.intercept);
    rr.add(e * e);
  }
  f.residual = std::sqrt(rr.value() / n);
  return f;
}

// First index of the tail half of a checkpoint list.
inline std::size_t tail_start(std::size_t n) { return n / 2; }

namespace detail {

inline void require_fit_window(std::span<const double> xs, const char* who, bool argument_error) {
  auto fail = [&](const std::string& msg) {
    if (argument_error) throw ArgumentError(std::string(who) + ": " + msg);
    throw FitError(std::string(who) + ": " + msg);
  };
  if (xs.size() < 8) fail("need at least 8 checkpoints");
  if (!(xs.front() > std::exp(1.0))) fail("checkpoints must exceed e");
  if (xs.back() < 100.0 * xs.front()) fail("checkpoints must span at least two decades");
}

}  // namespace detail

// values ~ C log log x + c over the tail half of the checkpoints.
inline LineFit loglog_fit(BiasSeries& series) {
  detail::require_fit_window(series.checkpoints, "loglog_fit", false);
  std::vector<double> t, y;
  for (std::size_t i = tail_start(series.checkpoints.size()); i < series.checkpoints.size(); ++i) {
    t.push_back(std::log(std::log(series.checkpoints[i])));
    y.push_back(series.values[i]);
  }
  series.fit = least_squares(t, y);
  return *series.fit;
}

}  // namespace drh
