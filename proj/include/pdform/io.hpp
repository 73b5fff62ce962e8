#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pdform/errors.hpp"
#include "pdform/finiteness.hpp"
#include "pdform/forms.hpp"
#include "pdform/gauss.hpp"
#include "pdform/matrix.hpp"
#include "pdform/scalar.hpp"
#include "pdform/sos.hpp"
#include "pdform/volume.hpp"

namespace pdform {

using json = nlohmann::json;

namespace io {

// Non-finite doubles are written as null (JSON has no infinity) and read back as +inf.
inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline double read_number(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return to_double(parse_rational(j.get<std::string>()));
  throw InputError("expected a number, got " + j.dump());
}

template <class S>
S read_scalar(const json& j) {
  if (j.is_string()) return parse_scalar<S>(j.get<std::string>());
  if (j.is_number_integer()) return S(j.get<long long>());
  if (j.is_number()) {
    if constexpr (is_exact_v<S>) {
      return Rational(j.get<double>());
    } else {
      return j.get<double>();
    }
  }
  throw InputError("expected a number or numeric string, got " + j.dump());
}

template <class S>
json write_scalar(const S& x) {
  if constexpr (is_exact_v<S>) {
    return format_scalar(x);
  } else {
    return number(x);
  }
}

inline const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw InputError("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw InputError(std::string("missing field '") + key + "'");
  return *it;
}

inline std::optional<double> optional_number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return read_number(*it);
}

inline MultiIndex read_multi_index(const json& j) {
  if (!j.is_array()) throw InputError("multi-index must be an array");
  std::vector<int> e;
  for (const auto& x : j) {
    if (!x.is_number_integer()) throw InputError("multi-index entries must be integers");
    e.push_back(x.get<int>());
  }
  return MultiIndex(std::move(e));
}

inline json write_basis(const MonomialBasis& b) {
  json arr = json::array();
  for (const auto& alpha : b) arr.push_back(alpha.exponents());
  return arr;
}

inline MonomialBasis read_basis(const json& j) {
  if (!j.is_array() || j.empty()) throw InputError("basis must be a non-empty array");
  MultiIndex first = read_multi_index(j[0]);
  MonomialBasis b(static_cast<int>(first.size()), first.degree());
  if (b.size() != j.size()) throw InputError("basis is not a complete monomial basis");
  for (std::size_t i = 0; i < b.size(); ++i)
    if (read_multi_index(j[i]) != b[i]) throw InputError("basis order differs from the graded-lex order");
  return b;
}

}  // namespace io

// ---- forms ----------------------------------------------------------------

template <class S>
json form_to_json(const Form<S>& g) {
  json terms = json::array();
  for (const auto& [alpha, c] : g.terms()) terms.push_back({{"alpha", alpha.exponents()}, {"coef", format_scalar(c)}});
  return {{"n", g.n()}, {"d", g.degree()}, {"terms", terms}};
}

template <class S>
Form<S> form_from_json(const json& j) {
  const int n = io::field(j, "n").get<int>();
  const int d = io::field(j, "d").get<int>();
  Form<S> g(n, d);
  const json& terms = io::field(j, "terms");
  if (!terms.is_array()) throw InputError("'terms' must be an array");
  for (const auto& t : terms) g.add_term(io::read_multi_index(io::field(t, "alpha")), io::read_scalar<S>(io::field(t, "coef")));
  return g;
}

// ---- matrices -------------------------------------------------------------

template <class S>
json matrix_to_json(const Matrix<S>& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(io::write_scalar(m(i, j)));
    rows.push_back(row);
  }
  return {{"size", m.rows()}, {"rows", rows}};
}

template <class S>
Matrix<S> matrix_from_json(const json& j) {
  const json& rows = io::field(j, "rows");
  if (!rows.is_array()) throw InputError("'rows' must be an array");
  const std::size_t r = rows.size();
  if (auto it = j.find("size"); it != j.end() && it->get<std::size_t>() != r)
    throw InputError("'size' does not match the number of rows");
  const std::size_t c = r == 0 ? 0 : rows[0].size();
  Matrix<S> m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (!rows[i].is_array() || rows[i].size() != c) throw InputError("ragged matrix rows");
    for (std::size_t k = 0; k < c; ++k) m(i, k) = io::read_scalar<S>(rows[i][k]);
  }
  return m;
}

template <class S>
json moment_matrix_to_json(const MomentMatrix<S>& m) {
  json j = matrix_to_json(m.entries);
  j["basis"] = io::write_basis(m.basis);
  return j;
}

template <class S>
MomentMatrix<S> moment_matrix_from_json(const json& j) {
  MomentMatrix<S> m{io::read_basis(io::field(j, "basis")), matrix_from_json<S>(j)};
  if (m.entries.rows() != m.basis.size() || m.entries.cols() != m.basis.size())
    throw InputError("moment matrix size does not match its basis");
  return m;
}

// ---- estimates --------------------------------------------------------------

inline json estimate_to_json(const Estimate& e) { return {{"value", io::number(e.value)}, {"stderr", io::number(e.std_error)}}; }

inline Estimate estimate_from_json(const json& j) {
  return {io::read_number(io::field(j, "value")), io::read_number(io::field(j, "stderr"))};
}

inline json volume_estimate_to_json(const VolumeEstimate& v) {
  return {{"value", io::number(v.value)},     {"stderr", io::number(v.std_error)},
          {"samples", v.samples},             {"rejected", v.rejected},
          {"max_term_share", v.max_term_share}, {"seed", v.seed},
          {"flags", v.flags}};
}

inline VolumeEstimate volume_estimate_from_json(const json& j) {
  VolumeEstimate v;
  v.value = io::read_number(io::field(j, "value"));
  v.std_error = io::read_number(io::field(j, "stderr"));
  v.samples = io::field(j, "samples").get<std::size_t>();
  v.rejected = j.value("rejected", std::size_t{0});
  v.max_term_share = j.value("max_term_share", 0.0);
  v.seed = j.value("seed", std::uint64_t{0});
  v.flags = j.value("flags", std::vector<std::string>{});
  return v;
}

template <class S>
json gram_residual_to_json(const GramResidual<S>& r) {
  return {{"residual", io::write_scalar(r.residual)},
          {"condition_number", io::number(r.condition_number)},
          {"exact", is_exact_v<S>},
          {"difference", form_to_json(r.difference)}};
}

template <class S>
GramResidual<S> gram_residual_from_json(const json& j) {
  GramResidual<S> r;
  r.residual = io::read_scalar<S>(io::field(j, "residual"));
  r.condition_number = j.contains("condition_number") ? io::read_number(j["condition_number"]) : 0.0;
  if (j.contains("difference")) r.difference = form_from_json<S>(j["difference"]);
  return r;
}

inline json moment_estimate_to_json(const MomentMatrixEstimate& m) {
  return {{"basis", io::write_basis(m.basis)}, {"values", matrix_to_json(m.values)}, {"stderr", matrix_to_json(m.std_errors)}};
}

inline MomentMatrixEstimate moment_estimate_from_json(const json& j) {
  return {io::read_basis(io::field(j, "basis")), matrix_from_json<double>(io::field(j, "values")),
          matrix_from_json<double>(io::field(j, "stderr"))};
}

// ---- volume reports -----------------------------------------------------------

inline json derivative_to_json(const DerivativeReport& r) {
  json dirs = json::array();
  for (const auto& v : r.directions) dirs.push_back(form_to_json(v));
  return {{"order", r.order},
          {"directions", dirs},
          {"value", io::number(r.value)},
          {"stderr", io::number(r.std_error)},
          {"samples", r.samples},
          {"finite_difference", r.finite_difference ? io::number(*r.finite_difference) : json(nullptr)},
          {"step", r.step}};
}

inline DerivativeReport derivative_from_json(const json& j) {
  DerivativeReport r;
  r.order = io::field(j, "order").get<int>();
  for (const auto& v : io::field(j, "directions")) r.directions.push_back(form_from_json<double>(v));
  r.value = io::read_number(io::field(j, "value"));
  r.std_error = io::read_number(io::field(j, "stderr"));
  r.samples = j.value("samples", std::size_t{0});
  r.finite_difference = io::optional_number(j, "finite_difference");
  r.step = j.value("step", 0.0);
  return r;
}

inline json cm_report_to_json(const CmReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"trial", e.trial},
                       {"order", e.order},
                       {"value", io::number(e.value)},
                       {"stderr", io::number(e.std_error)},
                       {"finite_difference", e.finite_difference ? io::number(*e.finite_difference) : json(nullptr)}});
  return {{"entries", entries},
          {"min_z", io::number(r.min_z)},
          {"violations", r.violations},
          {"max_fd_z", io::number(r.max_fd_z)},
          {"passed", r.passed()}};
}

inline CmReport cm_report_from_json(const json& j) {
  CmReport r;
  for (const auto& e : io::field(j, "entries"))
    r.entries.push_back({io::field(e, "trial").get<int>(), io::field(e, "order").get<int>(),
                         io::read_number(io::field(e, "value")), io::read_number(io::field(e, "stderr")),
                         io::optional_number(e, "finite_difference")});
  r.min_z = io::read_number(io::field(j, "min_z"));
  r.violations = io::field(j, "violations").get<int>();
  r.max_fd_z = io::read_number(io::field(j, "max_fd_z"));
  return r;
}

inline json laplace_report_to_json(const LaplaceReport& r) {
  return {{"laplace", estimate_to_json(r.laplace)},
          {"volume_path", estimate_to_json(r.volume_path)},
          {"z", io::number(r.z)},
          {"proposal_scale", r.proposal_scale},
          {"max_pairing_error", r.max_pairing_error},
          {"samples", r.samples},
          {"passed", r.passed()}};
}

inline LaplaceReport laplace_report_from_json(const json& j) {
  LaplaceReport r;
  r.laplace = estimate_from_json(io::field(j, "laplace"));
  r.volume_path = estimate_from_json(io::field(j, "volume_path"));
  r.z = io::read_number(io::field(j, "z"));
  r.proposal_scale = j.value("proposal_scale", 0.0);
  r.max_pairing_error = j.value("max_pairing_error", 0.0);
  r.samples = j.value("samples", std::size_t{0});
  return r;
}

inline json l2l1_report_to_json(const L2L1Report& r) {
  return {{"ratio", r.ratio},
          {"ratio_stderr", r.ratio_std_error},
          {"expected_ratio", r.expected_ratio},
          {"ratio_z", io::number(r.ratio_z)},
          {"l1", r.l1},
          {"l2", r.l2},
          {"l2_rel_stderr", r.l2_rel_std_error},
          {"trials", r.trials},
          {"violations", r.violations},
          {"min_margin", io::number(r.min_margin)},
          {"max_identity_error", r.max_identity_error},
          {"passed", r.passed()}};
}

inline L2L1Report l2l1_report_from_json(const json& j) {
  L2L1Report r;
  r.ratio = io::read_number(io::field(j, "ratio"));
  r.ratio_std_error = io::read_number(io::field(j, "ratio_stderr"));
  r.expected_ratio = io::read_number(io::field(j, "expected_ratio"));
  r.ratio_z = io::read_number(io::field(j, "ratio_z"));
  r.l1 = io::read_number(io::field(j, "l1"));
  r.l2 = io::read_number(io::field(j, "l2"));
  r.l2_rel_std_error = io::read_number(io::field(j, "l2_rel_stderr"));
  r.trials = io::field(j, "trials").get<int>();
  r.violations = io::field(j, "violations").get<int>();
  r.min_margin = io::read_number(io::field(j, "min_margin"));
  r.max_identity_error = io::read_number(io::field(j, "max_identity_error"));
  return r;
}

// ---- sos ----------------------------------------------------------------------

template <class S>
json gram_form_to_json(const GramForm<S>& g) {
  return {{"basis", io::write_basis(g.basis)}, {"gram", matrix_to_json(g.gram)}, {"form", form_to_json(g.form)}};
}

/// Rebuilds the form from basis and matrix and checks it against the stored expansion.
template <class S>
GramForm<S> gram_form_from_json(const json& j) {
  GramForm<S> g(matrix_from_json<S>(io::field(j, "gram")), io::read_basis(io::field(j, "basis")));
  if (j.contains("form")) {
    Form<S> stored = form_from_json<S>(j["form"]);
    if constexpr (is_exact_v<S>) {
      if (!(stored == g.form)) throw InputError("stored form does not match m^T G m");
    } else {
      Form<double> diff = stored - g.form;
      for (const auto& [alpha, c] : diff.terms())
        if (std::abs(c) > 1e-12 * (1.0 + std::abs(stored.coefficient(alpha))))
          throw InputError("stored form does not match m^T G m");
      g.form = stored;
    }
  }
  return g;
}

template <class S>
json functional_to_json(const PseudoMomentFunctional<S>& l) {
  json moments = json::array();
  for (const auto& [gamma, v] : l.moments()) moments.push_back({{"alpha", gamma.exponents()}, {"value", format_scalar(v)}});
  return {{"n", l.n()}, {"d", l.degree()}, {"moments", moments}};
}

template <class S>
PseudoMomentFunctional<S> functional_from_json(const json& j) {
  PseudoMomentFunctional<S> l(io::field(j, "n").get<int>(), io::field(j, "d").get<int>());
  for (const auto& m : io::field(j, "moments")) l.set(io::read_multi_index(io::field(m, "alpha")), io::read_scalar<S>(io::field(m, "value")));
  return l;
}

template <class S>
json pseudo_moment_matrix_to_json(const PseudoMomentMatrix<S>& p) {
  return {{"moment_matrix", moment_matrix_to_json(p.matrix)}, {"min_eigenvalue", p.min_eigenvalue}, {"psd", p.psd}};
}

template <class S>
PseudoMomentMatrix<S> pseudo_moment_matrix_from_json(const json& j) {
  return {moment_matrix_from_json<S>(io::field(j, "moment_matrix")), io::read_number(io::field(j, "min_eigenvalue")),
          io::field(j, "psd").get<bool>()};
}

inline json sos_volume_to_json(const SosVolume& v) {
  return {{"estimate", volume_estimate_to_json(v.estimate)},
          {"closed_form", v.closed_form ? io::number(*v.closed_form) : json(nullptr)}};
}

inline SosVolume sos_volume_from_json(const json& j) {
  return {volume_estimate_from_json(io::field(j, "estimate")), io::optional_number(j, "closed_form")};
}

// ---- finiteness ---------------------------------------------------------------

inline json classification_to_json(const Classification& c) {
  json zeros = json::array();
  for (const auto& z : c.zeros) {
    json zj = {{"at_infinity", z.at_infinity}, {"location", z.location}};
    if (c.certification == Certification::exact) {
      zj["order"] = z.order;
      if (z.root) zj["root"] = {format_scalar(z.root->lo), format_scalar(z.root->hi)};
    } else {
      zj["hessian_corank"] = z.hessian_corank;
      zj["value"] = z.value;
      zj["gradient_norm"] = z.gradient_norm;
      zj["tangent_eigenvalues"] = z.tangent_eigenvalues;
    }
    zeros.push_back(zj);
  }
  json j = {{"verdict", std::string(to_string(c.verdict))},
            {"zeros", zeros},
            {"certification", std::string(to_string(c.certification))}};
  if (c.tolerances) {
    j["tolerances"] = {{"tol_zero", c.tolerances->tol_zero},
                       {"tol_grad", c.tolerances->tol_grad},
                       {"tol_pd", c.tolerances->tol_pd}};
  } else {
    j["tolerances"] = nullptr;
  }
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

inline Classification classification_from_json(const json& j) {
  Classification c;
  c.verdict = parse_verdict(io::field(j, "verdict").get<std::string>());
  const std::string cert = io::field(j, "certification").get<std::string>();
  if (cert != "exact" && cert != "numeric") throw InputError("unknown certification '" + cert + "'");
  c.certification = cert == "exact" ? Certification::exact : Certification::numeric;
  for (const auto& zj : io::field(j, "zeros")) {
    ZeroInfo z;
    z.at_infinity = zj.value("at_infinity", false);
    z.location = zj.value("location", std::vector<double>{});
    z.order = zj.value("order", 0);
    if (auto it = zj.find("root"); it != zj.end() && it->is_array() && it->size() == 2)
      z.root = RootInterval{parse_rational((*it)[0].get<std::string>()), parse_rational((*it)[1].get<std::string>())};
    z.hessian_corank = zj.value("hessian_corank", 0);
    z.value = zj.value("value", 0.0);
    z.gradient_norm = zj.value("gradient_norm", 0.0);
    z.tangent_eigenvalues = zj.value("tangent_eigenvalues", std::vector<double>{});
    c.zeros.push_back(std::move(z));
  }
  if (auto it = j.find("tolerances"); it != j.end() && it->is_object())
    c.tolerances = Tolerances{(*it).value("tol_zero", 0.0), (*it).value("tol_grad", 0.0), (*it).value("tol_pd", 0.0)};
  c.note = j.value("note", std::string{});
  return c;
}

inline FinitenessHint parse_hint(const std::string& s) {
  for (FinitenessHint h : {FinitenessHint::likely_finite, FinitenessHint::likely_infinite, FinitenessHint::inconclusive,
                           FinitenessHint::negative})
    if (to_string(h) == s) return h;
  throw InputError("unknown diagnostic verdict '" + s + "'");
}

inline json diagnostic_to_json(const DiagnosticReport& r) {
  json stages = json::array();
  for (const auto& s : r.stages)
    stages.push_back({{"samples", s.samples},
                      {"value", io::number(s.value)},
                      {"stderr", io::number(s.std_error)},
                      {"max_term_share", s.max_term_share}});
  json j = {{"verdict", std::string(to_string(r.verdict))},
            {"stages", stages},
            {"tail_index", io::number(r.tail_index)},
            {"drift_z", io::number(r.drift_z)},
            {"relative_drift", io::number(r.relative_drift)}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline DiagnosticReport diagnostic_from_json(const json& j) {
  DiagnosticReport r;
  r.verdict = parse_hint(io::field(j, "verdict").get<std::string>());
  for (const auto& s : io::field(j, "stages"))
    r.stages.push_back({io::field(s, "samples").get<std::size_t>(), io::read_number(io::field(s, "value")),
                        io::read_number(io::field(s, "stderr")), s.value("max_term_share", 0.0)});
  r.tail_index = io::read_number(io::field(j, "tail_index"));
  r.drift_z = io::read_number(io::field(j, "drift_z"));
  r.relative_drift = io::read_number(io::field(j, "relative_drift"));
  r.note = j.value("note", std::string{});
  return r;
}

}  // namespace pdform
