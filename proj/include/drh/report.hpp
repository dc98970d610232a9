#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "drh/euler_product.hpp"
#include "drh/function_field.hpp"
#include "drh/series.hpp"

// CSV and JSON emission. Numbers are printed with 17 significant digits so
// identical doubles always give identical bytes.
namespace drh::report {

using json = nlohmann::ordered_json;

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline double loglog(double x) { return x > std::exp(1.0) ? std::log(std::log(x)) : std::nan(""); }

inline void write_trace_csv(std::ostream& out, const ProductTrace& tr) {
  out << "x,re_logP,im_logP,re_norm,im_norm\n";
  for (std::size_t i = 0; i < tr.checkpoints.size(); ++i) {
    const cplx n = i < tr.normalized.size() ? tr.normalized[i] : std::exp(tr.log_values[i]);
    out << fmt(tr.checkpoints[i]) << ',' << fmt(tr.log_values[i].real()) << ',' << fmt(tr.log_values[i].imag()) << ','
        << fmt(n.real()) << ',' << fmt(n.imag()) << '\n';
  }
}

inline void write_series_csv(std::ostream& out, const BiasSeries& s) {
  out << "x,value,loglogx\n";
  for (std::size_t i = 0; i < s.checkpoints.size(); ++i)
    out << fmt(s.checkpoints[i]) << ',' << fmt(s.values[i]) << ',' << fmt(loglog(s.checkpoints[i])) << '\n';
}

inline json fit_json(const std::optional<LineFit>& f) {
  if (!f) return nullptr;
  return json{{"C", f->slope}, {"c", f->intercept}, {"residual", f->residual}};
}

inline json verdict_json(const std::optional<double>& tol, const std::optional<bool>& pass) {
  json v;
  v["tolerance"] = tol ? json(*tol) : json(nullptr);
  v["pass"] = pass ? json(*pass) : json(nullptr);
  return v;
}

inline json trace_json(const ProductTrace& tr) {
  json j;
  j["kind"] = "trace";
  j["label"] = tr.spec_label;
  j["s"] = complex_json(tr.s);
  j["max_branch_modulus"] = tr.max_branch_modulus;
  json cps = json::array();
  for (std::size_t i = 0; i < tr.checkpoints.size(); ++i) {
    const cplx n = i < tr.normalized.size() ? tr.normalized[i] : std::exp(tr.log_values[i]);
    cps.push_back({{"x", tr.checkpoints[i]},
                   {"re_logP", tr.log_values[i].real()},
                   {"im_logP", tr.log_values[i].imag()},
                   {"re_norm", n.real()},
                   {"im_norm", n.imag()}});
  }
  j["checkpoints"] = std::move(cps);
  return j;
}

inline json convergence_json(const ConvergenceReport& rep) {
  json j;
  j["kind"] = "convergence";
  j["label"] = rep.trace.spec_label;
  j["s"] = complex_json(rep.trace.s);
  j["r"] = rep.r;
  j["nu"] = rep.nu;
  j["l_target"] = complex_json(rep.l_target);
  j["target"] = complex_json(rep.target);
  j["tail_max_dev"] = rep.tail_max_dev;
  j["log_avg_dev"] = rep.log_avg_dev;
  j["verdict"] = verdict_json(rep.tolerance, rep.pass);
  json cps = json::array();
  for (std::size_t i = 0; i < rep.trace.checkpoints.size(); ++i)
    cps.push_back({{"x", rep.trace.checkpoints[i]},
                   {"re_logP", rep.trace.log_values[i].real()},
                   {"im_logP", rep.trace.log_values[i].imag()},
                   {"re_norm", rep.trace.normalized[i].real()},
                   {"im_norm", rep.trace.normalized[i].imag()},
                   {"dev", rep.deviations[i]}});
  j["checkpoints"] = std::move(cps);
  return j;
}

inline json series_json(const BiasSeries& s, const std::string& kind) {
  json j;
  j["kind"] = kind;
  j["label"] = s.label;
  j["weight"] = s.weight;
  j["fit"] = fit_json(s.fit);
  json cps = json::array();
  for (std::size_t i = 0; i < s.checkpoints.size(); ++i) {
    json c{{"x", s.checkpoints[i]}, {"value", s.values[i]}};
    if (i < s.imag_values.size()) c["imag"] = s.imag_values[i];
    if (i < s.ratios.size()) c["ratio"] = s.ratios[i];
    cps.push_back(std::move(c));
  }
  j["checkpoints"] = std::move(cps);
  return j;
}

inline json lpoly_json(const ff::LPolynomial& L) {
  json c = json::array(), r = json::array();
  for (const auto& z : L.coeffs) c.push_back(complex_json(z));
  for (const auto& z : L.roots) r.push_back(complex_json(z));
  return json{{"q", L.q}, {"coeffs", c}, {"roots", r}, {"nu_sqrtq", L.nu_sqrtq}, {"r_half", L.r_half}, {"weight_error", L.weight_error}};
}

inline json ff_convergence_json(const ff::FFCharacter& chi, const ff::FFConvergenceReport& rep, std::optional<double> tol,
                                std::optional<bool> pass) {
  json j;
  j["kind"] = "ff_convergence";
  j["label"] = rep.trace.spec_label;
  j["q"] = chi.modulus.q();
  j["modulus"] = chi.modulus.to_string();
  j["char"] = chi.index;
  j["order"] = chi.order;
  j["even"] = chi.is_even;
  j["s"] = complex_json(rep.trace.s);
  j["r"] = rep.r;
  j["nu"] = rep.nu;
  j["nu_sqrtq"] = rep.nu_sqrtq;
  j["target"] = complex_json(rep.target);
  j["target_nu_sqrtq"] = complex_json(rep.target_nu_sqrtq);
  j["tail_max_dev"] = rep.tail_max_dev;
  j["lpoly"] = lpoly_json(rep.lpoly);
  j["verdict"] = verdict_json(tol, pass);
  json cps = json::array();
  for (std::size_t i = 0; i < rep.degrees.size(); ++i) {
    const std::size_t k = static_cast<std::size_t>(rep.degrees[i]);
    cps.push_back({{"degree", rep.degrees[i]},
                   {"x", rep.trace.checkpoints[k]},
                   {"re_logP", rep.trace.log_values[k].real()},
                   {"im_logP", rep.trace.log_values[k].imag()},
                   {"re_ratio", rep.ratio[i].real()},
                   {"im_ratio", rep.ratio[i].imag()},
                   {"dev", rep.deviations[i]}});
  }
  j["checkpoints"] = std::move(cps);
  return j;
}

inline json trace_check_json(const ff::FFCharacter& chi, const ff::TraceCheck& tc, std::optional<double> tol, std::optional<bool> pass) {
  json j;
  j["kind"] = "ff_trace";
  j["q"] = chi.modulus.q();
  j["modulus"] = chi.modulus.to_string();
  j["char"] = chi.index;
  j["order"] = chi.order;
  j["max_residual"] = tc.max_residual;
  j["verdict"] = verdict_json(tol, pass);
  json rows = json::array();
  for (std::size_t l = 1; l < tc.lhs.size(); ++l)
    rows.push_back({{"l", l}, {"lhs", complex_json(tc.lhs[l])}, {"rhs", complex_json(tc.rhs[l])}});
  j["terms"] = std::move(rows);
  return j;
}

// Writes text to path; "-" means stdout.
inline void write_text(const std::string& path, const std::string& text, std::ostream& stdout_stream) {
  if (path == "-") {
    stdout_stream << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace drh::report
