#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "pdform/errors.hpp"
#include "pdform/forms.hpp"
#include "pdform/gauss.hpp"
#include "pdform/gram.hpp"
#include "pdform/matrix.hpp"
#include "pdform/volume.hpp"

namespace pdform {

/// A form given by a Gram matrix, g = m_{d/2}(x)^T G m_{d/2}(x).
template <class S>
struct GramForm {
  MonomialBasis basis;
  Matrix<S> gram;
  Form<S> form;

  GramForm() = default;
  GramForm(Matrix<S> g, MonomialBasis b) : basis(std::move(b)), gram(std::move(g)), form(gram_to_form(gram, basis)) {}
};

/// Theta_l = m_{d/2}(l) m_{d/2}(l)^T, so that Tr(Theta_l G) = (m^T G m)(l).
template <class S>
Matrix<S> rank_one_theta(const std::vector<S>& ell, int d) {
  if (d < 2 || d % 2 != 0) throw InputError("rank_one_theta needs even d >= 2");
  if (ell.empty()) throw InputError("rank_one_theta needs a non-empty vector");
  MonomialBasis basis(static_cast<int>(ell.size()), d / 2);
  std::vector<S> m = basis.evaluate(std::span<const S>(ell));
  Matrix<S> theta(m.size(), m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) theta(i, j) = m[i] * m[j];
  return theta;
}

/// Tr(A B) for square matrices of equal size.
template <class S>
S trace_pairing(const Matrix<S>& a, const Matrix<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw InputError("trace pairing needs square matrices of equal size");
  S t(0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t += a(i, j) * b(j, i);
  return t;
}

/// Linear functional on degree-d forms, stored by its values on monomials.
template <class S>
class PseudoMomentFunctional {
 public:
  PseudoMomentFunctional(int n, int d) : n_(n), d_(d) {
    if (n < 1) throw InputError("functional needs n >= 1");
    if (d < 2 || d % 2 != 0) throw InputError("functional degree must be even and at least 2");
  }

  int n() const { return n_; }
  int degree() const { return d_; }
  const std::map<MultiIndex, S>& moments() const { return moments_; }

  void set(const MultiIndex& gamma, const S& value) {
    if (gamma.size() != static_cast<std::size_t>(n_) || gamma.degree() != d_)
      throw InputError("moment index does not match functional (n, d)");
    moments_[gamma] = value;
  }

  const S& at(const MultiIndex& gamma) const {
    auto it = moments_.find(gamma);
    if (it == moments_.end()) throw InputError("functional has no value for a required moment");
    return it->second;
  }

  bool complete() const { return moments_.size() == MonomialBasis(n_, d_).size(); }

  /// L(g) = sum_alpha g_alpha L(x^alpha).
  S operator()(const Form<S>& g) const {
    if (g.n() != n_ || g.degree() != d_) throw InputError("form does not match functional (n, d)");
    S sum(0);
    for (const auto& [alpha, c] : g.terms()) sum += c * at(alpha);
    return sum;
  }

 private:
  int n_;
  int d_;
  std::map<MultiIndex, S> moments_;
};

/// Degree-d moments of the Gaussian with covariance sigma_d^2 Q^{-1}.
template <class S>
PseudoMomentFunctional<S> gaussian_functional(const Matrix<S>& q, int d) {
  MomentMatrix<S> m = moment_matrix(q, d);
  PseudoMomentFunctional<S> l(static_cast<int>(q.rows()), d);
  for (std::size_t i = 0; i < m.basis.size(); ++i)
    for (std::size_t j = i; j < m.basis.size(); ++j) l.set(m.basis[i] + m.basis[j], m.entries(i, j));
  return l;
}

/// Evaluation at a point: L(x^gamma) = l^gamma.
template <class S>
PseudoMomentFunctional<S> point_functional(const std::vector<S>& ell, int d) {
  PseudoMomentFunctional<S> l(static_cast<int>(ell.size()), d);
  MonomialBasis basis(static_cast<int>(ell.size()), d);
  std::vector<S> values = basis.evaluate(std::span<const S>(ell));
  for (std::size_t i = 0; i < basis.size(); ++i) l.set(basis[i], values[i]);
  return l;
}

/// Convex (or any linear) combination of point evaluations.
template <class S>
PseudoMomentFunctional<S> mixture_functional(const std::vector<S>& weights, const std::vector<std::vector<S>>& points,
                                             int d) {
  if (weights.size() != points.size() || points.empty()) throw InputError("mixture needs one weight per point");
  PseudoMomentFunctional<S> l(static_cast<int>(points[0].size()), d);
  MonomialBasis basis(l.n(), d);
  std::vector<S> acc(basis.size(), S(0));
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<S> values = basis.evaluate(std::span<const S>(points[p]));
    for (std::size_t i = 0; i < basis.size(); ++i) acc[i] += weights[p] * values[i];
  }
  for (std::size_t i = 0; i < basis.size(); ++i) l.set(basis[i], acc[i]);
  return l;
}

template <class S>
struct PseudoMomentMatrix {
  MomentMatrix<S> matrix;
  double min_eigenvalue = 0.0;
  bool psd = false;
};

inline constexpr double psd_relative_floor = 1e-10;

/// M_d(L)[alpha, beta] = L(x^{alpha+beta}), with its PSD status: the matrix
/// counts as PSD when its smallest eigenvalue is >= -1e-10 * max|M|.
template <class S>
PseudoMomentMatrix<S> pseudo_moment_matrix(const PseudoMomentFunctional<S>& l) {
  PseudoMomentMatrix<S> out{MomentMatrix<S>{MonomialBasis(l.n(), l.degree() / 2), {}}, 0.0, false};
  const MonomialBasis& basis = out.matrix.basis;
  out.matrix.entries = Matrix<S>(basis.size(), basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j) out.matrix.entries(i, j) = l.at(basis[i] + basis[j]);
  SymMatrix approx = out.matrix.entries.template cast<double>();
  out.min_eigenvalue = symmetric_eigenvalues(approx).front();
  out.psd = out.min_eigenvalue >= -psd_relative_floor * max_abs_entry(approx);
  return out;
}

/// The Gram form with G = M_d(L)^{-1}, defined when M_d(L) is positive
/// definite (L in the interior of the pseudo-moment cone).
template <class S>
GramForm<S> nesterov_gram(const PseudoMomentFunctional<S>& l) {
  PseudoMomentMatrix<S> pm = pseudo_moment_matrix(l);
  const Matrix<S>& m = pm.matrix.entries;
  Matrix<S> inv;
  if constexpr (is_exact_v<S>) {
    if (!is_positive_definite_exact(m)) throw SingularMatrixError("functional not in interior: moment matrix is not positive definite");
    inv = inverse(m);
  } else {
    if (!is_positive_definite(m) || condition_number(m) > 1e14)
      throw SingularMatrixError("functional not in interior: moment matrix is not positive definite");
    inv = spd_inverse(m);
    Matrix<S> r = Matrix<S>::identity(m.rows()) - m * inv;
    inv += inv * r;
    inv = 0.5 * (inv + inv.transpose());
  }
  return GramForm<S>(std::move(inv), pm.matrix.basis);
}

struct SosVolume {
  VolumeEstimate estimate;
  std::optional<double> closed_form;  // d = 2 only
};

/// Volume of {m^T G m <= 1}; for d = 2 the closed ellipsoid value is attached.
inline SosVolume sos_volume(const SymMatrix& gm, const MonomialBasis& basis, const McConfig& cfg) {
  GramForm<double> gf(gm, basis);
  SosVolume out{volume_mc(gf.form, cfg), std::nullopt};
  if (basis.k() == 1) out.closed_form = volume_quadratic_closed(gm);
  return out;
}

}  // namespace pdform
