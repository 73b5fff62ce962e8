#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pdform/errors.hpp"
#include "pdform/finiteness.hpp"
#include "pdform/gauss.hpp"
#include "pdform/io.hpp"
#include "pdform/sos.hpp"
#include "pdform/volume.hpp"

namespace pdform::cli {

enum class OutputFormat { json, csv, text };

inline OutputFormat parse_output_format(const std::string& s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  if (s == "text") return OutputFormat::text;
  throw InputError("unknown output format '" + s + "'");
}

/// PDFORM_THREADS, when set to a positive integer.
inline std::optional<unsigned> thread_cap() {
  const char* env = std::getenv("PDFORM_THREADS");
  if (env == nullptr) return std::nullopt;
  char* end = nullptr;
  const long cap = std::strtol(env, &end, 10);
  if (end == env || cap < 1) return std::nullopt;
  return static_cast<unsigned>(cap);
}

inline unsigned capped_shards(unsigned requested) {
  const unsigned n = std::max(1u, requested);
  if (auto cap = thread_cap()) return std::min(n, *cap);
  return n;
}

/// Logical CPUs, capped by PDFORM_THREADS.
inline unsigned default_shards() { return capped_shards(std::thread::hardware_concurrency()); }

struct RunConfig {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 42;
  unsigned shards = default_shards();
  std::optional<double> tol_zero;
  std::optional<double> tol_pd;  // relative to the Hessian norm at each zero
  OutputFormat output = OutputFormat::json;
  bool exact = false;

  McConfig mc() const { return McConfig{samples, seed, shards, 0}; }
};

/// Command output plus the process exit code it implies.
struct Result {
  json body;
  int exit_code = 0;
};

// ---- input ------------------------------------------------------------------

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

/// Forms are always parsed exactly, then rounded when the command runs in double precision.
inline Form<Rational> read_form(const std::string& path) { return form_from_json<Rational>(read_json_file(path)); }

inline std::vector<Form<double>> read_forms(const std::string& path) {
  json j = read_json_file(path);
  std::vector<Form<double>> out;
  if (j.is_array()) {
    for (const auto& f : j) out.push_back(form_from_json<Rational>(f).cast<double>());
  } else {
    out.push_back(form_from_json<Rational>(j).cast<double>());
  }
  return out;
}

inline Matrix<Rational> read_matrix(const std::string& path) { return matrix_from_json<Rational>(read_json_file(path)); }

inline MultiIndex parse_gamma(const std::string& s) {
  std::vector<int> e;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      e.push_back(std::stoi(item, &pos));
      if (pos != item.size()) throw InputError("");
    } catch (const std::exception&) {
      throw InputError("--gamma must be a comma-separated list of integers");
    }
  }
  if (e.empty()) throw InputError("--gamma is empty");
  return MultiIndex(std::move(e));
}

// ---- commands -------------------------------------------------------------------

inline std::vector<std::size_t> diagnostic_schedule(std::size_t samples) {
  const std::size_t base = std::max<std::size_t>(samples / 10, 1000);
  return {base, 4 * base, 16 * base};
}

inline Result volume(const Form<Rational>& g, const RunConfig& rc, bool diagnostic = true) {
  const Form<double> gd = g.cast<double>();
  json body;
  body["form"] = form_to_json(g);
  body["estimate"] = volume_estimate_to_json(volume_mc(gd, rc.mc()));
  body["closed_form"] = g.degree() == 2 ? io::number(volume_quadratic_closed(quadratic_matrix(gd))) : json(nullptr);
  if (g.n() == 2) {
    Classification c = classify_binary(g);
    body["classification"] = classification_to_json(c);
    body["quadrature"] = implies_finite_volume(c.verdict) ? json(binary_volume_quadrature(g)) : json(nullptr);
  }
  if (diagnostic) body["diagnostic"] = diagnostic_to_json(finiteness_diagnostic(gd, diagnostic_schedule(rc.samples), rc.mc()));
  return {body, 0};
}

inline Result moment_matrix_command(const Matrix<Rational>& q, int d, const RunConfig& rc) {
  const int n = static_cast<int>(q.rows());
  json body;
  body["n"] = n;
  body["d"] = d;
  body["sigma_d"] = sigma_d(n, d);
  body["sigma_d_power"] = format_scalar(sigma_d_power(n, d));
  if (rc.exact) {
    MomentMatrix<Rational> m = moment_matrix(q, d);
    body["moment_matrix"] = moment_matrix_to_json(m);
    body["hankel_defect"] = hankel_defect(m);
  } else {
    MomentMatrix<double> m = moment_matrix(q.cast<double>(), d);
    body["moment_matrix"] = moment_matrix_to_json(m);
    body["hankel_defect"] = hankel_defect(m);
  }
  return {body, 0};
}

inline Result gram_check(const Matrix<Rational>& q, int d, const RunConfig& rc) {
  if (rc.exact) return {gram_residual_to_json(gram_identity_residual(q, d)), 0};
  return {gram_residual_to_json(gram_identity_residual(q.cast<double>(), d)), 0};
}

inline Result sphere_moments(const Matrix<Rational>& q, int d, const std::optional<MultiIndex>& gamma,
                             const RunConfig& rc) {
  const SymMatrix qd = q.cast<double>();
  json body;
  body["d"] = d;
  if (gamma) {
    Estimate e = sphere_measure_moment_mc(qd, d, *gamma, rc.mc());
    const double exact = to_double(sigma_d_power(static_cast<int>(q.rows()), d) * gaussian_moment(inverse(q), *gamma));
    body["gamma"] = gamma->exponents();
    body["estimate"] = estimate_to_json(e);
    body["exact"] = exact;
    body["z"] = io::number(z_score(e.value, exact, e.std_error));
    return {body, 0};
  }
  MomentMatrixEstimate est = sphere_measure_moment_matrix_mc(qd, d, rc.mc());
  MomentMatrix<double> exact = moment_matrix(qd, d);
  double max_z = 0.0;
  for (std::size_t i = 0; i < est.values.rows(); ++i)
    for (std::size_t j = 0; j < est.values.cols(); ++j)
      max_z = std::max(max_z, std::abs(z_score(est.values(i, j), exact.entries(i, j), est.std_errors(i, j))));
  body["estimate"] = moment_estimate_to_json(est);
  body["moment_matrix"] = moment_matrix_to_json(exact);
  body["max_abs_z"] = io::number(max_z);
  return {body, 0};
}

inline Result classify_binary_command(const Form<Rational>& g) { return {classification_to_json(classify_binary(g)), 0}; }

inline Result generic_check_command(const Form<Rational>& g, const RunConfig& rc) {
  GenericCheckConfig cfg;
  cfg.seed = rc.seed;
  cfg.tol_zero = rc.tol_zero;
  if (rc.tol_pd) cfg.tol_pd_relative = *rc.tol_pd;
  cfg.threads = rc.shards;
  Classification c = rc.exact ? generic_check(g, cfg) : generic_check(g.cast<double>(), cfg);
  return {classification_to_json(c), c.verdict == Verdict::inconclusive ? 3 : 0};
}

inline Result cm_check_command(const Form<Rational>& g, int max_k, int trials, const RunConfig& rc) {
  return {cm_report_to_json(cm_check(g.cast<double>(), max_k, trials, rc.mc(), rc.seed + 1)), 0};
}

inline Result l2l1_check_command(const Form<Rational>& g, int trials, const RunConfig& rc) {
  return {l2l1_report_to_json(l2l1_extremal_check(g.cast<double>(), trials, rc.mc(), rc.seed + 1)), 0};
}

inline Result derivative_command(const Form<Rational>& g, const std::vector<Form<double>>& dirs,
                                 const std::optional<Form<Rational>>& h, const DerivativeOptions& opt,
                                 const RunConfig& rc) {
  const Form<double> weight = h ? h->cast<double>() : Form<double>::constant(g.n(), 1.0);
  return {derivative_to_json(directional_derivative_mc(g.cast<double>(), dirs, weight, rc.mc(), opt)), 0};
}

inline Result diagnostic_command(const Form<Rational>& g, const RunConfig& rc) {
  DiagnosticReport r = finiteness_diagnostic(g.cast<double>(), diagnostic_schedule(rc.samples), rc.mc());
  return {diagnostic_to_json(r), r.verdict == FinitenessHint::inconclusive ? 3 : 0};
}

inline Result laplace_check_command(const Form<Rational>& g, const RunConfig& rc) {
  return {laplace_report_to_json(laplace_path_check(g.cast<double>(), rc.mc())), 0};
}

/// Gram input: a matrix JSON carrying "basis", or a bare matrix with n and d given.
inline MonomialBasis gram_basis(const json& mj, std::optional<int> n, std::optional<int> d) {
  if (mj.contains("basis")) return io::read_basis(mj["basis"]);
  if (!n || !d) throw InputError("Gram matrix has no \"basis\"; pass --n and --d");
  if (*d < 2 || *d % 2 != 0) throw InputError("--d must be even and at least 2");
  return MonomialBasis(*n, *d / 2);
}

inline Result sos_expand(const json& mj, std::optional<int> n, std::optional<int> d, const RunConfig& rc) {
  MonomialBasis basis = gram_basis(mj, n, d);
  if (rc.exact) return {gram_form_to_json(GramForm<Rational>(matrix_from_json<Rational>(mj), basis)), 0};
  return {gram_form_to_json(GramForm<double>(matrix_from_json<double>(mj), basis)), 0};
}

inline Result sos_volume_command(const json& mj, std::optional<int> n, std::optional<int> d, const RunConfig& rc) {
  MonomialBasis basis = gram_basis(mj, n, d);
  const SymMatrix gm = matrix_from_json<Rational>(mj).cast<double>();
  json body = sos_volume_to_json(sos_volume(gm, basis, rc.mc()));
  body["form"] = form_to_json(GramForm<double>(gm, basis).form);
  return {body, 0};
}

template <class S>
json nesterov_body(const PseudoMomentFunctional<S>& l) {
  json body;
  body["functional"] = functional_to_json(l);
  body["pseudo_moment_matrix"] = pseudo_moment_matrix_to_json(pseudo_moment_matrix(l));
  body["gram_form"] = gram_form_to_json(nesterov_gram(l));
  return body;
}

inline Result sos_nesterov_functional(const json& lj, const RunConfig& rc) {
  if (rc.exact) return {nesterov_body(functional_from_json<Rational>(lj)), 0};
  return {nesterov_body(functional_from_json<double>(lj)), 0};
}

inline Result sos_nesterov_gaussian(const Matrix<Rational>& q, int d, const RunConfig& rc) {
  if (rc.exact) return {nesterov_body(gaussian_functional(q, d)), 0};
  return {nesterov_body(gaussian_functional(q.cast<double>(), d)), 0};
}

// ---- sweeps ---------------------------------------------------------------------

/// a + b t, parsed from expressions such as "1", "t", "2*t", "1+0.5*t", "3-t".
struct Affine {
  double a = 0.0;
  double b = 0.0;
  double at(double t) const { return a + b * t; }
};

inline Affine parse_affine(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s.empty()) throw InputError("empty sweep entry");
  Affine out;
  std::size_t i = 0;
  while (i < s.size()) {
    double sign = 1.0;
    if (s[i] == '+' || s[i] == '-') {
      sign = s[i] == '-' ? -1.0 : 1.0;
      ++i;
    }
    std::size_t j = i;
    while (j < s.size() && s[j] != '+' && s[j] != '-') {
      if ((s[j] == 'e' || s[j] == 'E') && j + 1 < s.size() && (s[j + 1] == '+' || s[j + 1] == '-')) ++j;
      ++j;
    }
    std::string term = s.substr(i, j - i);
    if (term.empty()) throw InputError("malformed sweep entry '" + s + "'");
    bool has_t = false;
    if (term == "t") {
      term = "1";
      has_t = true;
    } else if (term.size() > 2 && term.substr(term.size() - 2) == "*t") {
      term.resize(term.size() - 2);
      has_t = true;
    }
    const double v = sign * to_double(parse_rational(term));
    (has_t ? out.b : out.a) += v;
    i = j;
  }
  return out;
}

inline std::vector<std::string> split_top_level(const std::string& s) {
  std::vector<std::string> parts;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

/// Q(t) from "Q=diag(e1,...,en)" or "Q=[[e11,e12],[e21,e22]]", entries affine in t.
inline std::vector<std::vector<Affine>> parse_sweep_matrix(const std::string& expr) {
  std::string s = expr;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s.rfind("Q=", 0) != 0) throw InputError("sweep expression must start with 'Q='");
  s = s.substr(2);
  std::vector<std::vector<Affine>> m;
  if (s.rfind("diag(", 0) == 0 && s.back() == ')') {
    auto entries = split_top_level(s.substr(5, s.size() - 6));
    const std::size_t n = entries.size();
    m.assign(n, std::vector<Affine>(n));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = parse_affine(entries[i]);
  } else if (s.size() > 4 && s.front() == '[' && s.back() == ']') {
    for (const auto& row : split_top_level(s.substr(1, s.size() - 2))) {
      if (row.size() < 2 || row.front() != '[' || row.back() != ']') throw InputError("malformed sweep matrix row '" + row + "'");
      std::vector<Affine> r;
      for (const auto& e : split_top_level(row.substr(1, row.size() - 2))) r.push_back(parse_affine(e));
      m.push_back(std::move(r));
    }
    for (const auto& r : m)
      if (r.size() != m.size()) throw InputError("sweep matrix is not square");
  } else {
    throw InputError("sweep expression must be Q=diag(...) or Q=[[...],...]");
  }
  return m;
}

struct SweepRange {
  double lo = 0.0;
  double hi = 0.0;
  int steps = 0;
};

/// "t=a..b" or "t=a..b:k". Without ":k", integer endpoints step by one and others give 11 points.
inline SweepRange parse_sweep_range(const std::string& spec) {
  if (spec.rfind("t=", 0) != 0) throw InputError("sweep range must look like t=a..b");
  std::string s = spec.substr(2);
  int steps = 0;
  if (auto colon = s.find(':'); colon != std::string::npos) {
    try {
      steps = std::stoi(s.substr(colon + 1));
    } catch (const std::exception&) {
      throw InputError("malformed step count in '" + spec + "'");
    }
    s.resize(colon);
  }
  auto dots = s.find("..");
  if (dots == std::string::npos) throw InputError("sweep range must look like t=a..b");
  const Rational lo = parse_rational(s.substr(0, dots));
  const Rational hi = parse_rational(s.substr(dots + 2));
  if (hi < lo) throw InputError("empty sweep range");
  if (steps == 0) {
    const bool integral = denominator(lo) == 1 && denominator(hi) == 1;
    steps = integral ? static_cast<int>(numerator(hi - lo)) + 1 : 11;
  }
  if (steps < 1) throw InputError("sweep needs at least one point");
  return {to_double(lo), to_double(hi), steps};
}

inline double sweep_point(const SweepRange& r, int i) {
  return r.steps == 1 ? r.lo : r.lo + (r.hi - r.lo) * i / (r.steps - 1);
}

/// Volumes of x^T Q(t) x, all on the same random rays.
inline Result sweep_quadratic(const std::string& expr, const SweepRange& range, const RunConfig& rc) {
  auto m = parse_sweep_matrix(expr);
  const std::size_t n = m.size();
  json rows = json::array();
  for (int i = 0; i < range.steps; ++i) {
    const double t = sweep_point(range, i);
    SymMatrix q(n, n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) q(a, b) = m[a][b].at(t);
    VolumeEstimate v = volume_mc(quadratic_form(q), rc.mc());
    rows.push_back({t, io::number(v.value), io::number(v.std_error), io::number(volume_quadratic_closed(q))});
  }
  return {{{"columns", {"t", "value", "stderr", "closed_form"}}, {"rows", rows}}, 0};
}

/// Volumes of g + t v, all on the same random rays.
inline Result sweep_form(const Form<Rational>& g, const Form<Rational>& v, const SweepRange& range, const RunConfig& rc) {
  const Form<double> gd = g.cast<double>();
  const Form<double> vd = v.cast<double>();
  json rows = json::array();
  for (int i = 0; i < range.steps; ++i) {
    const double t = sweep_point(range, i);
    VolumeEstimate e = volume_mc(gd + t * vd, rc.mc());
    rows.push_back({t, io::number(e.value), io::number(e.std_error)});
  }
  return {{{"columns", {"t", "value", "stderr"}}, {"rows", rows}}, 0};
}

// ---- rendering --------------------------------------------------------------------

namespace detail {

inline std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

inline void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_array() && !j.empty() && (j[0].is_object() || j[0].is_array())) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out.emplace_back(prefix, scalar_text(j));
  }
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace detail

/// JSON is printed with two-space indentation and sorted keys. Tables
/// ({"columns", "rows"}) become CSV tables; other results become key,value rows.
inline std::string render(const json& body, OutputFormat fmt) {
  if (fmt == OutputFormat::json) return body.dump(2) + "\n";
  std::ostringstream os;
  const bool table = body.is_object() && body.contains("columns") && body.contains("rows");
  if (fmt == OutputFormat::csv && table) {
    std::vector<std::string> cols;
    for (const auto& c : body["columns"]) cols.push_back(detail::csv_field(detail::scalar_text(c)));
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    for (const auto& row : body["rows"]) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << detail::csv_field(detail::scalar_text(row[i]));
      os << "\n";
    }
    return os.str();
  }
  std::vector<std::pair<std::string, std::string>> flat;
  detail::flatten(body, "", flat);
  if (fmt == OutputFormat::csv) {
    os << "key,value\n";
    for (const auto& [k, v] : flat) os << detail::csv_field(k) << "," << detail::csv_field(v) << "\n";
  } else {
    for (const auto& [k, v] : flat) os << k << ": " << v << "\n";
  }
  return os.str();
}

}  // namespace pdform::cli
