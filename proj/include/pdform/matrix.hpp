#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pdform/errors.hpp"
#include "pdform/scalar.hpp"

namespace pdform {

/// Dense row-major matrix over an arbitrary field.
///
/// The exact-rational code paths need Gauss-Jordan inversion and
/// determinants over Rational, which Eigen does not support for the
/// Boost.Multiprecision types shipped here; double-only spectral work goes
/// through Eigen (see to_eigen()).
template <class S>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, S(0)) {}
  Matrix(std::initializer_list<std::initializer_list<S>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw InputError("ragged matrix initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = S(1);
    return m;
  }

  static Matrix diagonal(const std::vector<S>& diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  S& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const S& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  template <class T>
  Matrix<T> cast() const {
    Matrix<T> out(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) {
        if constexpr (std::is_same_v<T, double>) {
          out(i, j) = to_double((*this)(i, j));
        } else {
          out(i, j) = T((*this)(i, j));
        }
      }
    return out;
  }

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(const S& c) {
    for (auto& x : data_) x *= c;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, const S& c) { return a *= c; }
  friend Matrix operator*(const S& c, Matrix a) { return a *= c; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw InputError("matrix product: inner dimensions differ");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const S& aik = a(i, k);
        if (is_zero(aik)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend std::vector<S> operator*(const Matrix& a, const std::vector<S>& x) {
    if (a.cols_ != x.size()) throw InputError("matrix-vector product: dimension mismatch");
    std::vector<S> y(a.rows_, S(0));
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t j = 0; j < a.cols_; ++j) y[i] += a(i, j) * x[j];
    return y;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  void require_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw InputError("matrix shapes differ");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<S> data_;
};

/// Dense real symmetric matrix (Gram matrices, quadratic forms).
using SymMatrix = Matrix<double>;

template <class S>
S trace(const Matrix<S>& a) {
  S t(0);
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
  return t;
}

template <class S>
double max_abs_entry(const Matrix<S>& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(to_double(a(i, j))));
  return m;
}

template <class S>
bool is_symmetric(const Matrix<S>& a, double tol = 0.0) {
  if (!a.is_square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      if constexpr (is_exact_v<S>) {
        if (a(i, j) != a(j, i)) return false;
      } else {
        double scale = std::max({1.0, std::abs(to_double(a(i, j))), std::abs(to_double(a(j, i)))});
        if (std::abs(to_double(a(i, j) - a(j, i))) > tol * scale) return false;
      }
    }
  return true;
}

template <class S>
void require_symmetric(const Matrix<S>& a, const char* what) {
  if (!is_symmetric(a, 1e-12)) throw InputError(std::string(what) + " must be a symmetric square matrix");
}

namespace detail {

template <class S>
std::size_t pivot_row(const Matrix<S>& a, std::size_t col, std::size_t start) {
  std::size_t best = start;
  if constexpr (is_exact_v<S>) {
    while (best < a.rows() && is_zero(a(best, col))) ++best;
  } else {
    for (std::size_t r = start + 1; r < a.rows(); ++r)
      if (std::abs(a(r, col)) > std::abs(a(best, col))) best = r;
  }
  return best;
}

}  // namespace detail

/// Determinant by Gaussian elimination with partial pivoting (exact for
/// Rational).
template <class S>
S determinant(Matrix<S> a) {
  if (!a.is_square()) throw InputError("determinant of a non-square matrix");
  const std::size_t n = a.rows();
  S det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = detail::pivot_row(a, c, c);
    if (p == n || is_zero(a(p, c))) return S(0);
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(p, j), a(c, j));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      if (is_zero(a(r, c))) continue;
      S f = a(r, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
    }
  }
  return det;
}

/// Gauss-Jordan inverse. Throws SingularMatrixError when a pivot vanishes
/// (exactly for Rational, below `tol` times the largest entry for doubles).
template <class S>
Matrix<S> inverse(Matrix<S> a, double tol = 1e-14) {
  if (!a.is_square()) throw InputError("inverse of a non-square matrix");
  const std::size_t n = a.rows();
  Matrix<S> inv = Matrix<S>::identity(n);
  const double scale = std::max(1e-300, max_abs_entry(a));
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = detail::pivot_row(a, c, c);
    bool singular = p == n || is_zero(a(p, c));
    if constexpr (!is_exact_v<S>) singular = singular || std::abs(to_double(a(p, c))) <= tol * scale;
    if (singular) throw SingularMatrixError("matrix is singular");
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(p, j), a(c, j));
        std::swap(inv(p, j), inv(c, j));
      }
    }
    S pivot = a(c, c);
    for (std::size_t j = 0; j < n; ++j) {
      a(c, j) /= pivot;
      inv(c, j) /= pivot;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || is_zero(a(r, c))) continue;
      S f = a(r, c);
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

/// Positive definiteness by symmetric elimination without pivoting: a
/// symmetric matrix is PD exactly when every pivot is positive.
template <class S>
bool is_positive_definite_exact(Matrix<S> a) {
  if (!is_symmetric(a)) return false;
  const std::size_t n = a.rows();
  for (std::size_t c = 0; c < n; ++c) {
    if (!(a(c, c) > S(0))) return false;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (is_zero(a(r, c))) continue;
      S f = a(r, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
    }
  }
  return true;
}

// ---- double-precision numerics backed by Eigen ----

inline Eigen::MatrixXd to_eigen(const Matrix<double>& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  return m;
}

inline Matrix<double> from_eigen(const Eigen::MatrixXd& m) {
  Matrix<double> a(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a(i, j) = m(i, j);
  return a;
}

/// Ascending eigenvalues of a symmetric matrix.
inline std::vector<double> symmetric_eigenvalues(const SymMatrix& a) {
  require_symmetric(a, "eigenvalue input");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(a), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

inline bool is_positive_definite(const SymMatrix& a) {
  if (!is_symmetric(a, 1e-12)) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(to_eigen(a));
  if (llt.info() != Eigen::Success) return false;
  return symmetric_eigenvalues(a).front() > 0.0;
}

/// 2-norm condition number of a symmetric matrix; +inf when singular.
inline double condition_number(const SymMatrix& a) {
  auto ev = symmetric_eigenvalues(a);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double e : ev) {
    lo = std::min(lo, std::abs(e));
    hi = std::max(hi, std::abs(e));
  }
  return lo == 0.0 ? std::numeric_limits<double>::infinity() : hi / lo;
}

inline void require_positive_definite(const SymMatrix& a, const char* what) {
  require_symmetric(a, what);
  if (!is_positive_definite(a)) throw NotPositiveDefiniteError(std::string(what) + " is not positive definite");
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
inline SymMatrix spd_inverse(const SymMatrix& a) {
  require_positive_definite(a, "matrix");
  Eigen::MatrixXd m = to_eigen(a);
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  inv = 0.5 * (inv + inv.transpose());
  return from_eigen(inv);
}

inline double spd_determinant(const SymMatrix& a) {
  require_positive_definite(a, "matrix");
  Eigen::LLT<Eigen::MatrixXd> llt(to_eigen(a));
  double det = 1.0;
  for (Eigen::Index i = 0; i < llt.matrixL().rows(); ++i) {
    double l = llt.matrixLLT()(i, i);
    det *= l * l;
  }
  return det;
}

}  // namespace pdform
