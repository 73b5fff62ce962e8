#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/QR>

#include "pdform/forms.hpp"
#include "pdform/gram.hpp"
#include "pdform/matrix.hpp"

namespace pdform {

using Rng = std::mt19937_64;

inline std::vector<double> random_normal_vector(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// signs of R's diagonal folded into Q).
inline SymMatrix random_orthogonal(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR();
  for (std::size_t j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return from_eigen(q);
}

/// Random symmetric positive definite matrix with eigenvalues log-uniform
/// in [1, max_condition] (so its condition number is at most max_condition),
/// rotated by a random orthogonal matrix.
inline SymMatrix random_spd(std::size_t n, Rng& rng, double max_condition = 10.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SymMatrix o = random_orthogonal(n, rng);
  SymMatrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) d(i, i) = std::exp(unit(rng) * std::log(max_condition));
  SymMatrix a = o * d * o.transpose();
  return 0.5 * (a + a.transpose());
}

/// Random positive semi-definite matrix of the given rank (full rank by default).
inline SymMatrix random_psd(std::size_t n, Rng& rng, std::size_t rank = 0) {
  if (rank == 0 || rank > n) rank = n;
  std::normal_distribution<double> normal;
  SymMatrix b(n, rank);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < rank; ++j) b(i, j) = normal(rng);
  SymMatrix a = b * b.transpose();
  return 0.5 * (a + a.transpose());
}

/// Random positive definite form of even degree d: x^T Q x with random SPD Q
/// for d = 2, otherwise m^T G m with G = A A^T / M + I/2.
inline Form<double> random_pd_form(int n, int d, Rng& rng) {
  if (d < 2 || d % 2 != 0) throw InputError("positive definite forms need even degree >= 2");
  if (d == 2) return quadratic_form(random_spd(static_cast<std::size_t>(n), rng));
  MonomialBasis basis(n, d / 2);
  const std::size_t m = basis.size();
  std::normal_distribution<double> normal;
  SymMatrix a(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) a(i, j) = normal(rng);
  SymMatrix g = a * a.transpose();
  g = (1.0 / static_cast<double>(m)) * g + 0.5 * SymMatrix::identity(m);
  return gram_to_form(0.5 * (g + g.transpose()), basis);
}

/// Form whose coordinates in the Bombieri-orthonormal basis
/// sqrt(multinomial(alpha)) x^alpha are i.i.d. standard normal.
inline Form<double> random_bombieri_form(int n, int d, Rng& rng) {
  std::normal_distribution<double> normal;
  Form<double> h(n, d);
  for (const auto& alpha : MonomialBasis(n, d))
    h.add_term(alpha, normal(rng) * std::sqrt(multinomial_as<double>(alpha)));
  return h;
}

}  // namespace pdform
