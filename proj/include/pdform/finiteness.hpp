#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "pdform/errors.hpp"
#include "pdform/forms.hpp"
#include "pdform/matrix.hpp"
#include "pdform/monte_carlo.hpp"
#include "pdform/univariate.hpp"
#include "pdform/volume.hpp"

namespace pdform {

enum class Verdict { finite, infinite, negative, positive_definite, generic, non_generic, inconclusive };
enum class Certification { exact, numeric };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::finite: return "finite";
    case Verdict::infinite: return "infinite";
    case Verdict::negative: return "negative";
    case Verdict::positive_definite: return "positive_definite";
    case Verdict::generic: return "generic";
    case Verdict::non_generic: return "non_generic";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

inline std::string_view to_string(Certification c) { return c == Certification::exact ? "exact" : "numeric"; }

inline Verdict parse_verdict(std::string_view s) {
  for (Verdict v : {Verdict::finite, Verdict::infinite, Verdict::negative, Verdict::positive_definite,
                    Verdict::generic, Verdict::non_generic, Verdict::inconclusive})
    if (to_string(v) == s) return v;
  throw InputError("unknown verdict '" + std::string(s) + "'");
}

/// One projective real zero.
struct ZeroInfo {
  std::vector<double> location;  // unit-vector representative
  bool at_infinity = false;      // binary case: the zero (1, 0) of x2
  int order = 0;                 // binary case: multiplicity
  int hessian_corank = 0;        // n >= 3 case: corank of the full Hessian
  std::optional<RootInterval> root;  // binary case: isolating interval of the root of g(y, 1)
  double value = 0.0;            // n >= 3 case: g at the location
  double gradient_norm = 0.0;
  std::vector<double> tangent_eigenvalues;
};

struct Tolerances {
  double tol_zero = 0.0;
  double tol_grad = 0.0;
  double tol_pd = 0.0;
};

struct Classification {
  Verdict verdict = Verdict::inconclusive;
  std::vector<ZeroInfo> zeros;
  Certification certification = Certification::exact;
  std::optional<Tolerances> tolerances;
  std::string note;
};

/// True for the verdicts that imply a finite sublevel volume.
inline bool implies_finite_volume(Verdict v) {
  return v == Verdict::finite || v == Verdict::positive_definite || v == Verdict::generic;
}

namespace detail {

inline Rational exact_coefficient(const Rational& c) { return c; }
inline Rational exact_coefficient(double c) {
  if (!std::isfinite(c)) throw InputError("non-finite coefficient");
  return Rational(c);
}

// g(y, 1) as an exact univariate polynomial.
template <class S>
UPoly dehomogenized_upoly(const Form<S>& g) {
  if (g.n() != 2) throw InputError("binary classification needs n = 2 (use generic_check for n >= 3)");
  if (g.is_zero()) throw InputError("cannot classify the zero form");
  std::vector<Rational> c(static_cast<std::size_t>(g.degree()) + 1, Rational(0));
  for (const auto& [alpha, v] : g.terms()) c[static_cast<std::size_t>(alpha[0])] += exact_coefficient(v);
  return UPoly(std::move(c));
}

struct BinaryStructure {
  UPoly ghat;
  int order_at_infinity = 0;
  std::vector<std::pair<UPoly, int>> factors;           // monic square-free a_i with multiplicity i
  std::vector<std::vector<RootInterval>> factor_roots;  // isolating intervals per factor
};

inline BinaryStructure binary_structure(const UPoly& ghat, int d) {
  BinaryStructure b;
  b.ghat = ghat;
  b.order_at_infinity = d - ghat.degree();
  b.factors = squarefree_decomposition(ghat);
  for (const auto& [a, i] : b.factors) b.factor_roots.push_back(isolate_real_roots(a));
  return b;
}

inline std::vector<double> unit_direction(double y) {
  const double r = std::hypot(y, 1.0);
  return {y / r, 1.0 / r};
}

}  // namespace detail

/// Exact classification of a binary form by the orders of its real zeros:
/// the sublevel volume is finite iff g >= 0 and every zero (including the
/// one at infinity, of order d - deg g(y, 1)) has order at most d/2 - 1.
template <class S>
Classification classify_binary(const Form<S>& g) {
  const UPoly ghat = detail::dehomogenized_upoly(g);
  const int d = g.degree();
  Classification c;
  c.certification = Certification::exact;
  if (d % 2 != 0) {
    c.verdict = Verdict::negative;
    c.note = "odd degree";
    return c;
  }
  detail::BinaryStructure b = detail::binary_structure(ghat, d);
  bool negative = ghat.lead() < 0 || b.order_at_infinity % 2 != 0;
  if (b.order_at_infinity > 0) {
    ZeroInfo z;
    z.location = {1.0, 0.0};
    z.at_infinity = true;
    z.order = b.order_at_infinity;
    c.zeros.push_back(z);
  }
  for (std::size_t f = 0; f < b.factors.size(); ++f) {
    const auto& [a, mult] = b.factors[f];
    for (const auto& iv : b.factor_roots[f]) {
      if (mult % 2 != 0) negative = true;
      ZeroInfo z;
      z.location = detail::unit_direction(root_to_double(a, iv));
      z.order = mult;
      z.root = iv;
      c.zeros.push_back(z);
    }
  }
  if (negative) {
    c.verdict = Verdict::negative;
    return c;
  }
  if (c.zeros.empty()) {
    c.verdict = Verdict::positive_definite;
    return c;
  }
  const bool all_small = std::all_of(c.zeros.begin(), c.zeros.end(), [d](const ZeroInfo& z) { return z.order <= d / 2 - 1; });
  c.verdict = all_small ? Verdict::finite : Verdict::infinite;
  return c;
}

namespace detail {

// Polynomial in a local variable t, ascending double coefficients.
inline double horner(const std::vector<double>& c, double t) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
  return acc;
}

// The integrand lc^{-2/d} prod_i |a_i|^{-2i/d} expressed in t = y - y0 (sign = +1)
// or t = y0 - y (sign = -1), with a_i's Taylor coefficients at y0 computed
// exactly so that factors vanishing at y0 keep full relative precision.
struct LocalIntegrand {
  double prefactor = 1.0;
  std::vector<std::vector<double>> factors;
  std::vector<double> exponents;

  double operator()(double t) const {
    double v = prefactor;
    for (std::size_t k = 0; k < factors.size(); ++k) v *= std::pow(std::abs(horner(factors[k], t)), exponents[k]);
    return v;
  }
};

inline LocalIntegrand local_integrand(const BinaryStructure& b, int d, const Rational& y0, bool is_root, int sign) {
  LocalIntegrand li;
  li.prefactor = std::pow(to_double(b.ghat.lead()), -2.0 / d);
  for (const auto& [a, mult] : b.factors) {
    std::vector<Rational> sh = a.shifted(y0);
    std::vector<double> c(sh.size());
    for (std::size_t k = 0; k < sh.size(); ++k) c[k] = to_double(sh[k]) * (sign < 0 && k % 2 == 1 ? -1.0 : 1.0);
    if (is_root && std::abs(c[0]) <= 1e-13 * std::max(1.0, std::abs(c.size() > 1 ? c[1] : 0.0))) c[0] = 0.0;
    li.factors.push_back(std::move(c));
    li.exponents.push_back(-2.0 * mult / d);
  }
  return li;
}

// Integrand on the tail y = y0 + sign * R / u, u in (0, 1] (so |y - y0| >= R), including the
// Jacobian R / u^2, written through reversed polynomials so u -> 0 is benign.
struct TailIntegrand {
  double prefactor = 1.0;
  double power = 0.0;  // of u
  std::vector<std::vector<double>> reversed;
  std::vector<double> exponents;

  double operator()(double u) const {
    double v = prefactor * std::pow(u, power);
    for (std::size_t k = 0; k < reversed.size(); ++k) v *= std::pow(std::abs(horner(reversed[k], u)), exponents[k]);
    return v;
  }
};

inline TailIntegrand tail_integrand(const BinaryStructure& b, int d, const Rational& y0, const Rational& r, int sign) {
  TailIntegrand ti;
  const double rd = to_double(r);
  ti.prefactor = std::pow(to_double(b.ghat.lead()), -2.0 / d) * rd;
  // a(y0 + s R/u) = u^{-deg} sum_k c_k (s R)^k u^{deg-k}
  ti.power = 2.0 * b.ghat.degree() / d - 2.0;
  for (const auto& [a, mult] : b.factors) {
    std::vector<Rational> sh = a.shifted(y0);
    const std::size_t deg = sh.size() - 1;
    std::vector<double> rev(sh.size());
    Rational scale(1);
    for (std::size_t k = 0; k <= deg; ++k) {
      rev[deg - k] = to_double(sh[k] * scale);
      scale *= r * Rational(sign);
    }
    ti.reversed.push_back(std::move(rev));
    ti.exponents.push_back(-2.0 * mult / d);
  }
  return ti;
}

template <class F>
double integrate_unit(const F& f, double length) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, 0.0, length, 1e-11);
}

}  // namespace detail

/// Volume of {g <= 1} for a binary form with finite volume, as the line
/// integral int_R g(y, 1)^{-2/d} dy. The line is split at the real roots;
/// every piece is integrated from its endpoint in local coordinates so the
/// integrable singularities are resolved to full precision, and the tails
/// are mapped to (0, 1] by y = y0 +/- R / u.
template <class S>
double binary_volume_quadrature(const Form<S>& g) {
  Classification c = classify_binary(g);
  if (!implies_finite_volume(c.verdict))
    throw ComputationError("sublevel volume is not finite (verdict " + std::string(to_string(c.verdict)) + ")");
  const int d = g.degree();
  const detail::BinaryStructure b = detail::binary_structure(detail::dehomogenized_upoly(g), d);

  // Breakpoints: real roots, refined to dyadic rationals near double precision.
  std::vector<Rational> roots;
  for (std::size_t f = 0; f < b.factors.size(); ++f)
    for (const auto& iv : b.factor_roots[f]) {
      Rational scale = abs_value(iv.lo) > abs_value(iv.hi) ? abs_value(iv.lo) : abs_value(iv.hi);
      if (scale < 1) scale = 1;
      roots.push_back(refine_root(b.factors[f].first, iv, scale / Rational(BigInt(1) << 64)).midpoint());
    }
  std::sort(roots.begin(), roots.end());

  std::vector<Rational> points = roots;
  const Rational lo = roots.empty() ? Rational(-1) : roots.front() - 1;
  const Rational hi = roots.empty() ? Rational(1) : roots.back() + 1;
  points.insert(points.begin(), lo);
  points.push_back(hi);
  auto is_root = [&roots](const Rational& p) { return std::binary_search(roots.begin(), roots.end(), p); };

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const Rational mid = (points[i] + points[i + 1]) / 2;
    const double half = to_double(mid - points[i]);
    total += detail::integrate_unit(detail::local_integrand(b, d, points[i], is_root(points[i]), +1), half);
    total += detail::integrate_unit(detail::local_integrand(b, d, points[i + 1], is_root(points[i + 1]), -1), half);
  }
  const Rational one(1);
  total += detail::integrate_unit(detail::tail_integrand(b, d, hi - one, one, +1), 1.0);
  total += detail::integrate_unit(detail::tail_integrand(b, d, lo + one, one, -1), 1.0);
  return total;
}

struct GenericCheckConfig {
  std::size_t starts = 0;         // random starts; 0 means 64 n
  std::optional<double> tol_zero;  // default 1e-10 * max |g| over sphere samples
  double tol_grad = 1e-7;
  double tol_pd_relative = 1e-6;  // tol_pd = tol_pd_relative * ||Hess g(z)||_2
  std::uint64_t seed = 42;
  int max_iterations = 500;
  unsigned threads = 1;
  double cluster_angle = 1e-3;
};

namespace detail {

struct SphereMinimum {
  std::vector<double> x;
  double value = 0.0;
  double gradient_norm = 0.0;  // norm of the Riemannian gradient
};

// Orthonormal basis of the tangent space x^perp, as an n x (n-1) matrix.
inline Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd a(n, n);
  a.col(0) = x;
  Eigen::Index skip = 0;
  x.cwiseAbs().maxCoeff(&skip);
  for (Eigen::Index j = 0, c = 1; j < n; ++j) {
    if (j == skip) continue;
    a.col(c++) = Eigen::VectorXd::Unit(n, j);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(n - 1);
}

inline Eigen::VectorXd to_vec(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }
inline std::vector<double> to_std(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Riemannian Newton iteration on the sphere with a shifted reduced Hessian
// and Armijo backtracking; stops when the accepted step becomes negligible.
inline SphereMinimum minimize_on_sphere(const Form<double>& g, std::vector<double> start, int max_iterations) {
  const int d = g.degree();
  Eigen::VectorXd x = to_vec(start).normalized();
  auto value = [&g](const Eigen::VectorXd& v) { return eval(g, to_std(v)); };
  double gx = value(x);
  for (int it = 0; it < max_iterations; ++it) {
    const std::vector<double> xs = to_std(x);
    const Eigen::VectorXd grad = to_vec(gradient(g, std::span<const double>(xs)));
    const Eigen::MatrixXd hess = to_eigen(hessian(g, std::span<const double>(xs)));
    const Eigen::MatrixXd u = tangent_basis(x);
    const Eigen::VectorXd gr = u.transpose() * grad;
    Eigen::MatrixXd hr = u.transpose() * hess * u - d * gx * Eigen::MatrixXd::Identity(u.cols(), u.cols());
    hr = 0.5 * (hr + hr.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hr);
    const double scale = std::max(1e-300, es.eigenvalues().cwiseAbs().maxCoeff());
    Eigen::VectorXd lam = es.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = std::max(std::abs(lam(i)), 1e-10 * scale);
    Eigen::VectorXd s = -(es.eigenvectors() * (es.eigenvectors().transpose() * gr).cwiseQuotient(lam));
    double slope = gr.dot(s);
    if (!(slope < 0.0)) {
      s = -gr;
      slope = -gr.squaredNorm();
    }
    if (slope == 0.0) break;
    const Eigen::VectorXd dir = u * s;
    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, alpha *= 0.5) {
      Eigen::VectorXd y = (x + alpha * dir).normalized();
      const double gy = value(y);
      if (gy <= gx + 1e-4 * alpha * slope) {
        accepted = true;
        const double moved = (y - x).norm();
        x = y;
        gx = gy;
        if (moved < 1e-14) it = max_iterations;
        break;
      }
    }
    if (!accepted) break;
  }
  const std::vector<double> xs = to_std(x);
  const Eigen::VectorXd grad = to_vec(gradient(g, std::span<const double>(xs)));
  SphereMinimum m;
  m.x = xs;
  m.value = gx;
  m.gradient_norm = (grad - x.dot(grad) * x).norm();
  return m;
}

inline std::vector<std::vector<double>> sphere_starts(int n, std::size_t random_starts, std::uint64_t seed) {
  std::vector<std::vector<double>> starts;
  const double inv = 1.0 / std::sqrt(static_cast<double>(n));
  // sign patterns up to the antipodal map
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    std::vector<double> s(static_cast<std::size_t>(n), inv);
    for (int i = 1; i < n; ++i)
      if ((mask >> (i - 1)) & 1U) s[static_cast<std::size_t>(i)] = -inv;
    starts.push_back(s);
  }
  for (int i = 0; i < n; ++i) {
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    e[static_cast<std::size_t>(i)] = 1.0;
    starts.push_back(e);
  }
  SphereSampler sampler(n, seed, 0);
  std::vector<double> z(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < random_starts; ++k) {
    sampler.next(z);
    starts.push_back(z);
  }
  return starts;
}

inline double projective_angle(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::acos(std::min(1.0, std::abs(dot)));
}

inline double sample_sup_norm(const Form<double>& g, std::uint64_t seed) {
  SphereSampler sampler(g.n(), seed, 1);
  FormEvaluator eval(g);
  std::vector<double> z(static_cast<std::size_t>(g.n()));
  double sup = 0.0;
  for (int k = 0; k < 4096; ++k) {
    sampler.next(z);
    sup = std::max(sup, std::abs(eval(z).value));
  }
  return sup;
}

}  // namespace detail

/// Numeric genericity test for n >= 3: finds the minima of g on the unit
/// sphere by multi-start Newton descent, clusters the zeros projectively and
/// inspects the Hessian on the tangent space at each. A zero is round when
/// all n-1 tangent eigenvalues exceed tol_pd.
template <class S>
Classification generic_check(const Form<S>& gin, const GenericCheckConfig& cfg = {}) {
  const Form<double> g = gin.template cast<double>();
  const int n = g.n();
  const int d = g.degree();
  if (n < 3) throw InputError("generic_check needs n >= 3 (use classify_binary for n = 2)");
  if (d < 4 || d % 2 != 0) throw InputError("generic_check needs even degree d >= 4");
  if (g.is_zero()) throw InputError("cannot classify the zero form");

  Classification c;
  c.certification = Certification::numeric;
  Tolerances tol;
  tol.tol_zero = cfg.tol_zero.value_or(1e-10 * detail::sample_sup_norm(g, cfg.seed));
  tol.tol_grad = cfg.tol_grad;

  const std::size_t random_starts = cfg.starts == 0 ? 64 * static_cast<std::size_t>(n) : cfg.starts;
  const auto starts = detail::sphere_starts(n, random_starts, cfg.seed);
  std::vector<detail::SphereMinimum> minima(starts.size());
  const unsigned threads = std::max(1u, cfg.threads);
  {
    std::vector<std::future<void>> jobs;
    for (unsigned t = 0; t < threads; ++t)
      jobs.push_back(std::async(threads == 1 ? std::launch::deferred : std::launch::async, [&, t] {
        for (std::size_t k = t; k < starts.size(); k += threads)
          minima[k] = detail::minimize_on_sphere(g, starts[k], cfg.max_iterations);
      }));
    for (auto& j : jobs) j.get();
  }

  double global_min = INFINITY;
  for (const auto& m : minima) global_min = std::min(global_min, m.value);
  if (global_min < -tol.tol_zero) {
    c.verdict = Verdict::negative;
    c.note = "form takes negative values on the sphere";
    c.tolerances = tol;
    return c;
  }
  if (global_min > tol.tol_zero) {
    c.verdict = Verdict::positive_definite;
    c.tolerances = tol;
    return c;
  }

  // Cluster the zero candidates, keeping the best representative of each.
  std::vector<detail::SphereMinimum> clusters;
  bool unconverged = false;
  for (const auto& m : minima) {
    if (m.value > tol.tol_zero) continue;
    if (m.gradient_norm > tol.tol_grad) {
      unconverged = true;
      continue;
    }
    auto it = std::find_if(clusters.begin(), clusters.end(), [&](const detail::SphereMinimum& r) {
      return detail::projective_angle(r.x, m.x) < cfg.cluster_angle;
    });
    if (it == clusters.end()) {
      clusters.push_back(m);
    } else if (m.value < it->value) {
      *it = m;
    }
  }

  bool any_negative = false;
  bool any_degenerate = false;
  bool any_ambiguous = false;
  double tol_pd_max = 0.0;
  for (auto& m : clusters) {
    // canonical sign: largest coordinate positive
    auto big = std::max_element(m.x.begin(), m.x.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (*big < 0) for (double& v : m.x) v = -v;
    const Eigen::VectorXd x = detail::to_vec(m.x);
    const Eigen::MatrixXd hess = to_eigen(hessian(g, std::span<const double>(m.x)));
    const Eigen::MatrixXd u = detail::tangent_basis(x);
    Eigen::MatrixXd t = u.transpose() * hess * u - d * m.value * Eigen::MatrixXd::Identity(n - 1, n - 1);
    t = 0.5 * (t + t.transpose());
    const Eigen::VectorXd lam = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t).eigenvalues();
    const double hnorm = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (hess + hess.transpose()))
                             .eigenvalues()
                             .cwiseAbs()
                             .maxCoeff();
    const double tol_pd = cfg.tol_pd_relative * hnorm;
    tol_pd_max = std::max(tol_pd_max, tol_pd);
    ZeroInfo z;
    z.location = m.x;
    z.value = m.value;
    z.gradient_norm = m.gradient_norm;
    z.tangent_eigenvalues = detail::to_std(lam);
    z.hessian_corank = 1;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      if (lam(i) < -tol_pd) {
        any_negative = true;
      } else if (lam(i) <= tol_pd) {
        ++z.hessian_corank;
        // clearly degenerate only well below the threshold
        if (std::abs(lam(i)) <= 1e-3 * tol_pd) {
          any_degenerate = true;
        } else {
          any_ambiguous = true;
        }
      }
    }
    c.zeros.push_back(std::move(z));
  }
  tol.tol_pd = tol_pd_max;
  c.tolerances = tol;

  if (any_negative) {
    c.verdict = Verdict::negative;
    c.note = "negative tangent Hessian eigenvalue at a zero";
  } else if (clusters.empty()) {
    c.verdict = Verdict::inconclusive;
    c.note = "minimization did not converge to a zero";
  } else if (any_degenerate) {
    c.verdict = Verdict::non_generic;
  } else if (any_ambiguous || unconverged) {
    c.verdict = Verdict::inconclusive;
    c.note = any_ambiguous ? "tangent eigenvalue within tolerance of zero" : "some minimizations did not converge";
  } else {
    c.verdict = Verdict::generic;
  }
  return c;
}

enum class FinitenessHint { likely_finite, likely_infinite, inconclusive, negative };

inline std::string_view to_string(FinitenessHint h) {
  switch (h) {
    case FinitenessHint::likely_finite: return "likely_finite";
    case FinitenessHint::likely_infinite: return "likely_infinite";
    case FinitenessHint::inconclusive: return "inconclusive";
    case FinitenessHint::negative: return "negative";
  }
  return "inconclusive";
}

struct DiagnosticStage {
  std::size_t samples = 0;
  double value = 0.0;
  double std_error = 0.0;
  double max_term_share = 0.0;
};

struct DiagnosticReport {
  FinitenessHint verdict = FinitenessHint::inconclusive;
  std::vector<DiagnosticStage> stages;
  double tail_index = INFINITY;  // Hill estimate from the largest run
  double drift_z = 0.0;          // last two estimates, in combined standard errors
  double relative_drift = 0.0;
  std::string note;
};

inline constexpr double infinite_tail_index = 1.1;
inline constexpr double finite_tail_index = 1.2;

/// Heuristic finiteness check: volume_mc at an increasing sample schedule,
/// with the drift of the estimates, the largest-term share and a Hill
/// estimate of the tail index of the integrand g^{-n/d}. A tail index at or
/// below 1 means the integral diverges; this is evidence, not proof.
template <class S>
DiagnosticReport finiteness_diagnostic(const Form<S>& g, const std::vector<std::size_t>& schedule, const McConfig& base) {
  if (schedule.empty()) throw InputError("diagnostic needs a non-empty sample schedule");
  DiagnosticReport r;
  std::vector<double> top;
  try {
    for (std::size_t s = 0; s < schedule.size(); ++s) {
      McConfig cfg = base;
      cfg.samples = schedule[s];
      cfg.seed = base.seed + s;
      cfg.keep_top = s + 1 == schedule.size() ? static_cast<std::size_t>(std::sqrt(static_cast<double>(schedule[s]))) + 1 : 0;
      VolumeEstimate e = volume_mc(g, cfg);
      r.stages.push_back({e.samples, e.value, e.std_error, e.max_term_share});
      if (s + 1 == schedule.size()) top = e.top_terms;
    }
  } catch (const NegativeFormError&) {
    r.verdict = FinitenessHint::negative;
    r.note = "form takes negative values";
    return r;
  }
  if (top.size() >= 2) r.tail_index = hill_tail_index(top, top.size() - 1);
  if (r.stages.size() >= 2) {
    const auto& a = r.stages[r.stages.size() - 2];
    const auto& b = r.stages.back();
    r.drift_z = z_score(b.value, a.value, std::hypot(a.std_error, b.std_error));
    r.relative_drift = b.value != 0.0 ? std::abs(b.value - a.value) / std::abs(b.value) : 0.0;
  }
  if (r.tail_index <= infinite_tail_index) {
    r.verdict = FinitenessHint::likely_infinite;
  } else if (r.tail_index >= finite_tail_index && r.relative_drift <= 0.05) {
    r.verdict = FinitenessHint::likely_finite;
  } else {
    r.verdict = FinitenessHint::inconclusive;
  }
  return r;
}

inline std::vector<std::size_t> default_diagnostic_schedule() { return {100'000, 400'000, 1'600'000}; }

}  // namespace pdform
