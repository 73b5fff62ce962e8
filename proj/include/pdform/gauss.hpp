#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <vector>

#include "pdform/errors.hpp"
#include "pdform/forms.hpp"
#include "pdform/gram.hpp"
#include "pdform/matrix.hpp"
#include "pdform/monte_carlo.hpp"
#include "pdform/scalar.hpp"

namespace pdform {

namespace detail {

inline void require_even_degree(int d, int min_degree = 2) {
  if (d < min_degree || d % 2 != 0)
    throw InputError("degree must be even and at least " + std::to_string(min_degree));
}

template <class S>
void require_pd(const Matrix<S>& q, const char* what) {
  require_symmetric(q, what);
  if constexpr (is_exact_v<S>) {
    if (!is_positive_definite_exact(q)) throw NotPositiveDefiniteError(std::string(what) + " is not positive definite");
  } else {
    require_positive_definite(q, what);
  }
}

template <class S>
Matrix<S> pd_inverse(const Matrix<S>& q) {
  if constexpr (is_exact_v<S>) {
    return inverse(q);
  } else {
    return spd_inverse(q);
  }
}

}  // namespace detail

/// sigma_d^d = binom(d/2+n-1, n-1) / prod_{i<d/2} (n + 2i), exactly.
///
/// This is the d-th power of the scale for which the degree-d Gaussian
/// moment matrix inverts to a Gram matrix of (x^T Q x)^{d/2}; it is rational
/// even though sigma_d itself usually is not.
inline Rational sigma_d_power(int n, int d) {
  if (n < 1) throw InputError("sigma_d needs n >= 1");
  detail::require_even_degree(d);
  Rational value(static_cast<long long>(binomial(d / 2 + n - 1, n - 1)));
  for (int i = 0; i < d / 2; ++i) value /= Rational(n + 2 * i);
  return value;
}

inline double sigma_d(int n, int d) { return std::pow(to_double(sigma_d_power(n, d)), 1.0 / d); }

/// Moments E[y^gamma] of y ~ N(0, cov), memoized over multi-indices.
///
/// Uses the Wick recursion E[y_i y^b] = sum_j cov_ij b_j E[y^(b - e_j)], which
/// sums the covariance products over all perfect matchings of the index
/// multiset without enumerating them.
template <class S>
class GaussianMoments {
 public:
  explicit GaussianMoments(Matrix<S> cov) : cov_(std::move(cov)) {
    require_symmetric(cov_, "covariance");
  }

  const Matrix<S>& covariance() const { return cov_; }

  S operator()(const MultiIndex& gamma) {
    if (gamma.size() != cov_.rows()) throw InputError("moment index has wrong length");
    if (gamma.degree() % 2 != 0) return S(0);
    if (gamma.degree() == 0) return S(1);
    if (auto it = memo_.find(gamma); it != memo_.end()) return it->second;

    std::vector<int> rest = gamma.exponents();
    std::size_t i = 0;
    while (rest[i] == 0) ++i;
    rest[i] -= 1;
    S total(0);
    for (std::size_t j = 0; j < rest.size(); ++j) {
      if (rest[j] == 0 || is_zero(cov_(i, j))) continue;
      const int multiplicity = rest[j];
      rest[j] -= 1;
      total += cov_(i, j) * S(multiplicity) * (*this)(MultiIndex(rest));
      rest[j] += 1;
    }
    memo_.emplace(gamma, total);
    return total;
  }

 private:
  Matrix<S> cov_;
  std::map<MultiIndex, S> memo_;
};

template <class S>
S gaussian_moment(const Matrix<S>& cov, const MultiIndex& gamma) {
  GaussianMoments<S> moments(cov);
  return moments(gamma);
}

/// Hankel-structured matrix indexed by MonomialBasis(n, d/2).
template <class S>
struct MomentMatrix {
  MonomialBasis basis;
  Matrix<S> entries;

  int degree() const { return 2 * basis.k(); }
  const S& operator()(std::size_t i, std::size_t j) const { return entries(i, j); }
};

/// Largest discrepancy between entries sharing alpha + beta (zero for a
/// genuine Hankel-like matrix).
template <class S>
double hankel_defect(const MomentMatrix<S>& m) {
  std::map<MultiIndex, S> first;
  double defect = 0.0;
  for (std::size_t i = 0; i < m.basis.size(); ++i)
    for (std::size_t j = 0; j < m.basis.size(); ++j) {
      MultiIndex gamma = m.basis[i] + m.basis[j];
      auto [it, inserted] = first.emplace(gamma, m.entries(i, j));
      if (!inserted) defect = std::max(defect, std::abs(to_double(m.entries(i, j) - it->second)));
    }
  return defect;
}

/// M_d[Q]: degree-d moments of N(0, sigma_d^2 Q^{-1}) arranged by m_{d/2}.
///
/// Every entry is a product of d/2 covariance entries, so the sigma_d^2
/// scaling contributes the rational factor sigma_d^d and the whole matrix is
/// exact when Q is rational.
template <class S>
MomentMatrix<S> moment_matrix(const Matrix<S>& q, int d) {
  detail::require_even_degree(d);
  detail::require_pd(q, "Q");
  const int n = static_cast<int>(q.rows());
  MomentMatrix<S> m{MonomialBasis(n, d / 2), {}};
  GaussianMoments<S> moments(detail::pd_inverse(q));
  S scale;
  if constexpr (is_exact_v<S>) {
    scale = sigma_d_power(n, d);
  } else {
    scale = to_double(sigma_d_power(n, d));
  }
  m.entries = Matrix<S>(m.basis.size(), m.basis.size());
  for (std::size_t i = 0; i < m.basis.size(); ++i)
    for (std::size_t j = i; j < m.basis.size(); ++j) {
      S v = scale * moments(m.basis[i] + m.basis[j]);
      m.entries(i, j) = v;
      m.entries(j, i) = v;
    }
  return m;
}

/// (x^T Q x)^{d/2} expanded in monomials.
template <class S>
Form<S> expand_power_quadratic(const Matrix<S>& q, int d) {
  detail::require_even_degree(d);
  return pow(quadratic_form(q), d / 2);
}

template <class S>
struct GramResidual {
  S residual{};                    // max |coefficient| of m^T M^{-1} m - (x^T Q x)^{d/2}
  double condition_number = 0.0;   // of M_d[Q]; 0 when not computed (exact mode)
  Form<S> difference;
};

/// Checks that M_d[Q]^{-1} is a Gram matrix of (x^T Q x)^{d/2}.
template <class S>
GramResidual<S> gram_identity_residual(const Matrix<S>& q, int d) {
  MomentMatrix<S> m = moment_matrix(q, d);
  GramResidual<S> out;
  Matrix<S> m_inv;
  if constexpr (is_exact_v<S>) {
    m_inv = inverse(m.entries);
  } else {
    out.condition_number = condition_number(m.entries);
    if (!std::isfinite(out.condition_number) || out.condition_number > 1e15)
      throw SingularMatrixError("moment matrix is numerically singular (condition " +
                                format_scalar(out.condition_number) + ")");
    m_inv = spd_inverse(m.entries);
    // One step of iterative refinement: X <- X + X (I - M X).
    Matrix<S> r = Matrix<S>::identity(m.basis.size()) - m.entries * m_inv;
    m_inv += m_inv * r;
    m_inv = 0.5 * (m_inv + m_inv.transpose());
  }
  out.difference = gram_to_form(m_inv, m.basis) - expand_power_quadratic(q, d);
  out.residual = S(0);
  for (const auto& [alpha, c] : out.difference.terms()) {
    S a = abs_value(c);
    if (a > out.residual) out.residual = a;
  }
  return out;
}

/// Mass of exp(-k (y^T Q y)^{d/2}) over R^n:
/// vol(S^{n-1}) Gamma((n+d)/d) / (k^{n/d} n sqrt(det Q)).
inline double partition_mass(const SymMatrix& q, int d, double k) {
  detail::require_even_degree(d);
  if (!(k > 0.0)) throw InputError("partition_mass needs k > 0");
  const int n = static_cast<int>(q.rows());
  const double det = spd_determinant(q);
  return sphere_area(n) * std::tgamma(static_cast<double>(n + d) / d) /
         (std::pow(k, static_cast<double>(n) / d) * n * std::sqrt(det));
}

/// The constant k with (2k)^{-1} = binom(d/2+n-1, n) that turns
/// exp(-k m^T G m) into the Gaussian-like density matching M_d[Q].
inline double gaussian_like_k(int n, int d) {
  detail::require_even_degree(d);
  return 1.0 / (2.0 * static_cast<double>(binomial(d / 2 + n - 1, n)));
}

/// Monte Carlo estimate of the degree-d moment z^gamma of the sphere measure
///   dnu = binom(d/2+n-1, n-1) sqrt(det Q) (z^T Q z)^{-(d+n)/2} dS / vol(S^{n-1}),
/// whose moments reproduce M_d[Q].
inline Estimate sphere_measure_moment_mc(const SymMatrix& q, int d, const MultiIndex& gamma, const McConfig& cfg) {
  detail::require_even_degree(d);
  detail::require_pd(q, "Q");
  const int n = static_cast<int>(q.rows());
  if (gamma.size() != q.rows()) throw InputError("moment index has wrong length");
  if (gamma.degree() != d) throw InputError("sphere moment index must have degree d");
  const double c = static_cast<double>(binomial(d / 2 + n - 1, n - 1)) * std::sqrt(spd_determinant(q));
  const double power = -0.5 * (d + n);
  auto integrand = [&q, &gamma, c, power, n](std::span<const double> z) -> std::optional<double> {
    double quad = 0.0;
    double mono = 1.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) quad += z[i] * q(i, j) * z[j];
      for (int p = 0; p < gamma[i]; ++p) mono *= z[i];
    }
    return c * std::pow(quad, power) * mono;
  };
  return sphere_average_scalar(n, cfg, integrand).estimate();
}

/// Total mass of the same sphere measure; equals binom(d/2+n-1, n-1) when Q = I.
inline Estimate sphere_measure_mass_mc(const SymMatrix& q, int d, const McConfig& cfg) {
  detail::require_even_degree(d);
  detail::require_pd(q, "Q");
  const int n = static_cast<int>(q.rows());
  const double c = static_cast<double>(binomial(d / 2 + n - 1, n - 1)) * std::sqrt(spd_determinant(q));
  const double power = -0.5 * (d + n);
  auto integrand = [&q, c, power, n](std::span<const double> z) -> std::optional<double> {
    double quad = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) quad += z[i] * q(i, j) * z[j];
    return c * std::pow(quad, power);
  };
  return sphere_average_scalar(n, cfg, integrand).estimate();
}

/// Every entry of the sphere-measure moment matrix from one common set of
/// samples. `values` and `std_errors` are indexed like M_d[Q].
struct MomentMatrixEstimate {
  MonomialBasis basis;
  SymMatrix values;
  SymMatrix std_errors;
};

namespace detail {

// Distinct gamma = alpha + beta over the basis, with a lookup table.
inline std::vector<MultiIndex> hankel_indices(const MonomialBasis& basis, Matrix<double>& slot) {
  std::map<MultiIndex, std::size_t> ids;
  std::vector<MultiIndex> gammas;
  slot = Matrix<double>(basis.size(), basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j) {
      MultiIndex g = basis[i] + basis[j];
      auto [it, inserted] = ids.emplace(g, gammas.size());
      if (inserted) gammas.push_back(g);
      slot(i, j) = static_cast<double>(it->second);
    }
  return gammas;
}

}  // namespace detail

inline MomentMatrixEstimate sphere_measure_moment_matrix_mc(const SymMatrix& q, int d, const McConfig& cfg) {
  detail::require_even_degree(d);
  detail::require_pd(q, "Q");
  const int n = static_cast<int>(q.rows());
  MomentMatrixEstimate out{MonomialBasis(n, d / 2), {}, {}};
  Matrix<double> slot;
  std::vector<MultiIndex> gammas = detail::hankel_indices(out.basis, slot);
  const double c = static_cast<double>(binomial(d / 2 + n - 1, n - 1)) * std::sqrt(spd_determinant(q));
  const double power = -0.5 * (d + n);
  auto integrand = [&q, &gammas, c, power, n](std::span<const double> z, std::span<double> values) -> bool {
    double quad = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) quad += z[i] * q(i, j) * z[j];
    const double w = c * std::pow(quad, power);
    for (std::size_t k = 0; k < gammas.size(); ++k) {
      double mono = w;
      for (int i = 0; i < n; ++i)
        for (int p = 0; p < gammas[k][i]; ++p) mono *= z[i];
      values[k] = mono;
    }
    return true;
  };
  SphereRun run = sphere_average(n, gammas.size(), cfg, integrand);
  out.values = SymMatrix(out.basis.size(), out.basis.size());
  out.std_errors = SymMatrix(out.basis.size(), out.basis.size());
  for (std::size_t i = 0; i < out.basis.size(); ++i)
    for (std::size_t j = 0; j < out.basis.size(); ++j) {
      auto k = static_cast<std::size_t>(slot(i, j));
      out.values(i, j) = run.mean(k);
      out.std_errors(i, j) = run.std_error(k);
    }
  return out;
}

/// Monte Carlo view of the Gaussian-like density P_G for g = (y^T Q y)^{d/2}:
/// the mass of exp(-k g) and its degree-d moments divided by the closed-form
/// partition_mass(). Integrates radially in closed form,
///   int phi e^{-k g} = int_S phi(z) Gamma((n+e)/d) / (d (k g(z))^{(n+e)/d}) dS,
/// for phi homogeneous of degree e.
struct GaussianLikeEstimate {
  Estimate mass;
  double closed_mass = 0.0;
  MonomialBasis basis;
  SymMatrix moments;
  SymMatrix std_errors;
};

inline GaussianLikeEstimate gaussian_like_moments_mc(const SymMatrix& q, int d, const McConfig& cfg) {
  detail::require_even_degree(d);
  detail::require_pd(q, "Q");
  const int n = static_cast<int>(q.rows());
  const double k = gaussian_like_k(n, d);
  GaussianLikeEstimate out;
  out.closed_mass = partition_mass(q, d, k);
  out.basis = MonomialBasis(n, d / 2);
  Matrix<double> slot;
  std::vector<MultiIndex> gammas = detail::hankel_indices(out.basis, slot);
  const double area = sphere_area(n);
  const double c_mass = area * std::tgamma(static_cast<double>(n) / d) / d;
  const double c_mom = area * std::tgamma(static_cast<double>(n + d) / d) / d;
  auto integrand = [&](std::span<const double> z, std::span<double> values) -> bool {
    double quad = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) quad += z[i] * q(i, j) * z[j];
    const double kg = k * std::pow(quad, 0.5 * d);
    values[0] = c_mass * std::pow(kg, -static_cast<double>(n) / d);
    const double w = c_mom * std::pow(kg, -static_cast<double>(n + d) / d);
    for (std::size_t t = 0; t < gammas.size(); ++t) {
      double mono = w;
      for (int i = 0; i < n; ++i)
        for (int p = 0; p < gammas[t][i]; ++p) mono *= z[i];
      values[t + 1] = mono;
    }
    return true;
  };
  SphereRun run = sphere_average(n, gammas.size() + 1, cfg, integrand);
  out.mass = run.estimate(0);
  out.moments = SymMatrix(out.basis.size(), out.basis.size());
  out.std_errors = SymMatrix(out.basis.size(), out.basis.size());
  for (std::size_t i = 0; i < out.basis.size(); ++i)
    for (std::size_t j = 0; j < out.basis.size(); ++j) {
      auto t = static_cast<std::size_t>(slot(i, j)) + 1;
      out.moments(i, j) = run.mean(t) / out.closed_mass;
      out.std_errors(i, j) = run.std_error(t) / out.closed_mass;
    }
  return out;
}

}  // namespace pdform
