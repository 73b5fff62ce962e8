#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pdform/errors.hpp"
#include "pdform/matrix.hpp"
#include "pdform/scalar.hpp"

namespace pdform {

/// Exponent vector of a monomial x^alpha.
///
/// Ordered graded-lexicographically: lower degree first; within one degree
/// x1^k comes first and the last variable is the least significant, so the
/// degree-2 monomials in two variables are ordered x1^2, x1*x2, x2^2.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents) : exps_(std::move(exponents)) {
    for (int e : exps_) {
      if (e < 0) throw InputError("negative exponent in multi-index");
      degree_ += e;
    }
  }
  MultiIndex(std::initializer_list<int> exponents) : MultiIndex(std::vector<int>(exponents)) {}

  static MultiIndex zero(std::size_t n) { return MultiIndex(std::vector<int>(n, 0)); }
  static MultiIndex unit(std::size_t n, std::size_t i, int power = 1) {
    std::vector<int> e(n, 0);
    e.at(i) = power;
    return MultiIndex(std::move(e));
  }

  std::size_t size() const { return exps_.size(); }
  int degree() const { return degree_; }
  int operator[](std::size_t i) const { return exps_[i]; }
  const std::vector<int>& exponents() const { return exps_; }

  friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
    if (a.size() != b.size()) throw InputError("multi-index length mismatch");
    std::vector<int> e(a.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = a[i] + b[i];
    return MultiIndex(std::move(e));
  }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.exps_ == b.exps_; }
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
    if (auto c = a.degree_ <=> b.degree_; c != 0) return c;
    return b.exps_ <=> a.exps_;
  }

 private:
  std::vector<int> exps_;
  int degree_ = 0;
};

/// Multinomial coefficient |alpha|! / (alpha_1! ... alpha_n!).
inline BigInt multinomial(const MultiIndex& alpha) {
  BigInt result = 1;
  int running = 0;
  for (int e : alpha.exponents()) {
    // running+e choose e, accumulated one factor at a time stays integral
    for (int j = 1; j <= e; ++j) {
      result *= running + j;
      result /= j;
    }
    running += e;
  }
  return result;
}

template <class S>
S multinomial_as(const MultiIndex& alpha) {
  if constexpr (is_exact_v<S>) {
    return S(multinomial(alpha));
  } else {
    return static_cast<S>(multinomial(alpha).template convert_to<double>());
  }
}

inline std::size_t binomial(int top, int bottom) {
  if (bottom < 0 || bottom > top) return 0;
  bottom = std::min(bottom, top - bottom);
  std::size_t r = 1;
  for (int i = 1; i <= bottom; ++i) r = r * static_cast<std::size_t>(top - bottom + i) / static_cast<std::size_t>(i);
  return r;
}

/// All degree-k monomials in n variables, graded-lex ascending. Row and
/// column labels of every Gram, moment and Hankel matrix in the library.
class MonomialBasis {
 public:
  MonomialBasis() = default;
  MonomialBasis(int n, int k) : n_(n), k_(k) {
    if (n < 1) throw InputError("monomial basis needs n >= 1");
    if (k < 0) throw InputError("monomial basis needs k >= 0");
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    generate(e, 0, k);
    for (std::size_t i = 0; i < monomials_.size(); ++i) index_.emplace(monomials_[i], i);
  }

  int n() const { return n_; }
  int k() const { return k_; }
  std::size_t size() const { return monomials_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return monomials_[i]; }
  auto begin() const { return monomials_.begin(); }
  auto end() const { return monomials_.end(); }

  std::size_t index_of(const MultiIndex& alpha) const {
    auto it = index_.find(alpha);
    if (it == index_.end()) throw InputError("monomial not in basis");
    return it->second;
  }

  /// The vector m_k(x) of monomial values.
  template <class T>
  std::vector<T> evaluate(std::span<const T> x) const {
    if (x.size() != static_cast<std::size_t>(n_)) throw InputError("point dimension does not match basis");
    std::vector<T> out;
    out.reserve(size());
    for (const auto& alpha : monomials_) {
      T v(1);
      for (std::size_t i = 0; i < x.size(); ++i)
        for (int p = 0; p < alpha[i]; ++p) v *= x[i];
      out.push_back(v);
    }
    return out;
  }

  friend bool operator==(const MonomialBasis& a, const MonomialBasis& b) {
    return a.n_ == b.n_ && a.k_ == b.k_;
  }

 private:
  void generate(std::vector<int>& e, std::size_t var, int remaining) {
    if (var + 1 == e.size()) {
      e[var] = remaining;
      monomials_.emplace_back(e);
      return;
    }
    for (int p = remaining; p >= 0; --p) {
      e[var] = p;
      generate(e, var + 1, remaining - p);
    }
    e[var] = 0;
  }

  int n_ = 0;
  int k_ = 0;
  std::vector<MultiIndex> monomials_;
  std::map<MultiIndex, std::size_t> index_;
};

inline MonomialBasis monomial_basis(int n, int k) { return MonomialBasis(n, k); }

/// Real homogeneous polynomial of degree d in n variables, stored sparsely.
///
/// Terms are kept in a sorted map without explicit zeros, so two forms are
/// equal exactly when their term maps are.
template <class S>
class Form {
 public:
  using scalar_type = S;
  using term_map = std::map<MultiIndex, S>;

  Form() = default;
  Form(int n, int d) : n_(n), d_(d) {
    if (n < 1) throw InputError("form needs at least one variable");
    if (d < 0) throw InputError("form degree must be non-negative");
  }
  Form(int n, int d, std::initializer_list<std::pair<MultiIndex, S>> terms) : Form(n, d) {
    for (const auto& [alpha, c] : terms) add_term(alpha, c);
  }

  static Form constant(int n, const S& c) {
    Form f(n, 0);
    f.add_term(MultiIndex::zero(static_cast<std::size_t>(n)), c);
    return f;
  }

  static Form monomial(int n, const MultiIndex& alpha, const S& c = S(1)) {
    Form f(n, alpha.degree());
    f.add_term(alpha, c);
    return f;
  }

  int n() const { return n_; }
  int degree() const { return d_; }
  const term_map& terms() const { return terms_; }
  std::size_t term_count() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  S coefficient(const MultiIndex& alpha) const {
    auto it = terms_.find(alpha);
    return it == terms_.end() ? S(0) : it->second;
  }

  /// Adds c*x^alpha, dropping the term if the coefficient cancels to zero.
  Form& add_term(const MultiIndex& alpha, const S& c) {
    if (alpha.size() != static_cast<std::size_t>(n_)) throw InputError("term has wrong number of variables");
    if (alpha.degree() != d_) throw InputError("term degree differs from form degree");
    if (pdform::is_zero(c)) return *this;
    auto [it, inserted] = terms_.emplace(alpha, c);
    if (!inserted) {
      it->second += c;
      if (pdform::is_zero(it->second)) terms_.erase(it);
    }
    return *this;
  }

  template <class T>
  Form<T> cast() const {
    Form<T> out(n_, d_);
    for (const auto& [alpha, c] : terms_) {
      if constexpr (std::is_same_v<T, double>) {
        out.add_term(alpha, to_double(c));
      } else {
        out.add_term(alpha, T(c));
      }
    }
    return out;
  }

  Form operator-() const {
    Form out(n_, d_);
    for (const auto& [alpha, c] : terms_) out.terms_.emplace(alpha, -c);
    return out;
  }

  Form& operator+=(const Form& o) {
    require_compatible(o);
    for (const auto& [alpha, c] : o.terms_) add_term(alpha, c);
    return *this;
  }
  Form& operator-=(const Form& o) {
    require_compatible(o);
    for (const auto& [alpha, c] : o.terms_) add_term(alpha, -c);
    return *this;
  }
  Form& operator*=(const S& s) {
    if (pdform::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [alpha, c] : terms_) c *= s;
    return *this;
  }

  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator*(Form a, const S& s) { return a *= s; }
  friend Form operator*(const S& s, Form a) { return a *= s; }

  friend Form operator*(const Form& a, const Form& b) {
    if (a.n_ != b.n_) throw InputError("cannot multiply forms in different numbers of variables");
    Form out(a.n_, a.d_ + b.d_);
    for (const auto& [alpha, ca] : a.terms_)
      for (const auto& [beta, cb] : b.terms_) out.add_term(alpha + beta, ca * cb);
    return out;
  }

  friend bool operator==(const Form& a, const Form& b) {
    return a.n_ == b.n_ && a.d_ == b.d_ && a.terms_ == b.terms_;
  }

 private:
  void require_compatible(const Form& o) const {
    if (n_ != o.n_ || d_ != o.d_) throw InputError("forms differ in variable count or degree");
  }

  int n_ = 1;
  int d_ = 0;
  term_map terms_;
};

template <class S>
Form<S> pow(const Form<S>& g, int k) {
  if (k < 0) throw InputError("negative power of a form");
  Form<S> result = Form<S>::constant(g.n(), S(1));
  Form<S> base = g;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

template <class S>
Form<S> linear_form(const std::vector<S>& coeffs) {
  const int n = static_cast<int>(coeffs.size());
  Form<S> f(n, 1);
  for (std::size_t i = 0; i < coeffs.size(); ++i) f.add_term(MultiIndex::unit(coeffs.size(), i), coeffs[i]);
  return f;
}

/// x^T Q x as a degree-2 form.
template <class S>
Form<S> quadratic_form(const Matrix<S>& q) {
  require_symmetric(q, "quadratic form matrix");
  const std::size_t n = q.rows();
  Form<S> f(static_cast<int>(n), 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<int> e(n, 0);
      e[i] += 1;
      e[j] += 1;
      f.add_term(MultiIndex(std::move(e)), q(i, j));
    }
  return f;
}

/// Coefficient matrix G of a quadratic form, g(x) = x^T G x.
template <class S>
Matrix<S> quadratic_matrix(const Form<S>& g) {
  if (g.degree() != 2) throw InputError("quadratic_matrix needs a degree-2 form");
  const std::size_t n = static_cast<std::size_t>(g.n());
  Matrix<S> q(n, n);
  for (const auto& [alpha, c] : g.terms()) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      for (int p = 0; p < alpha[i]; ++p) idx.push_back(i);
    if (idx[0] == idx[1]) {
      q(idx[0], idx[0]) = c;
    } else {
      q(idx[0], idx[1]) = c / S(2);
      q(idx[1], idx[0]) = c / S(2);
    }
  }
  return q;
}

namespace detail {

inline void require_dim(std::size_t got, int want) {
  if (got != static_cast<std::size_t>(want)) throw InputError("point dimension does not match form");
}

template <class T>
std::vector<std::vector<T>> power_table(std::span<const T> x, int max_power) {
  std::vector<std::vector<T>> table(x.size(), std::vector<T>(static_cast<std::size_t>(max_power) + 1, T(1)));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int p = 1; p <= max_power; ++p) table[i][p] = table[i][p - 1] * x[i];
  return table;
}

}  // namespace detail

/// Value of g at x, computed in the point's scalar type.
template <class S, class T>
T eval_at(const Form<S>& g, std::span<const T> x) {
  detail::require_dim(x.size(), g.n());
  auto table = detail::power_table(x, g.degree());
  T sum(0);
  for (const auto& [alpha, c] : g.terms()) {
    T term;
    if constexpr (std::is_same_v<T, double>) {
      term = to_double(c);
    } else {
      term = T(c);
    }
    for (std::size_t i = 0; i < x.size(); ++i) term *= table[i][alpha[i]];
    sum += term;
  }
  return sum;
}

template <class S>
double eval(const Form<S>& g, std::span<const double> x) {
  return eval_at<S, double>(g, x);
}

template <class S>
double eval(const Form<S>& g, const std::vector<double>& x) {
  return eval_at<S, double>(g, std::span<const double>(x));
}

/// Flattened double-precision copy of a form for hot Monte Carlo loops.
class FormEvaluator {
 public:
  FormEvaluator() = default;
  template <class S>
  explicit FormEvaluator(const Form<S>& g) : n_(g.n()), d_(g.degree()) {
    for (const auto& [alpha, c] : g.terms()) {
      coeffs_.push_back(to_double(c));
      exps_.insert(exps_.end(), alpha.exponents().begin(), alpha.exponents().end());
    }
    powers_.resize(static_cast<std::size_t>(n_) * (static_cast<std::size_t>(d_) + 1));
  }

  int n() const { return n_; }
  int degree() const { return d_; }

  struct Value {
    double value;
    double magnitude;  // sum of |c_alpha x^alpha|, bounds the rounding error
  };

  // Not thread-safe: uses an internal scratch table. Copy per thread.
  Value operator()(std::span<const double> x) {
    const std::size_t stride = static_cast<std::size_t>(d_) + 1;
    for (std::size_t i = 0; i < static_cast<std::size_t>(n_); ++i) {
      double* row = &powers_[i * stride];
      row[0] = 1.0;
      for (std::size_t p = 1; p < stride; ++p) row[p] = row[p - 1] * x[i];
    }
    double sum = 0.0;
    double mag = 0.0;
    for (std::size_t t = 0; t < coeffs_.size(); ++t) {
      double term = coeffs_[t];
      const int* e = &exps_[t * static_cast<std::size_t>(n_)];
      for (std::size_t i = 0; i < static_cast<std::size_t>(n_); ++i) term *= powers_[i * stride + e[i]];
      sum += term;
      mag += std::abs(term);
    }
    return {sum, mag};
  }

 private:
  int n_ = 0;
  int d_ = 0;
  std::vector<double> coeffs_;
  std::vector<int> exps_;
  std::vector<double> powers_;
};

/// Bombieri inner product: sum over alpha of g_alpha h_alpha / multinomial(d, alpha).
template <class S>
S bombieri_inner(const Form<S>& g, const Form<S>& h) {
  if (g.n() != h.n() || g.degree() != h.degree())
    throw InputError("Bombieri product needs forms with equal n and d");
  S sum(0);
  auto it = h.terms().begin();
  for (const auto& [alpha, c] : g.terms()) {
    while (it != h.terms().end() && it->first < alpha) ++it;
    if (it == h.terms().end()) break;
    if (it->first == alpha) sum += c * it->second / multinomial_as<S>(alpha);
  }
  return sum;
}

template <class S>
double bombieri_norm(const Form<S>& g) {
  return std::sqrt(to_double(bombieri_inner(g, g)));
}

/// The d-th power of the linear form l^T x, expanded in monomials. Under the
/// Bombieri pairing it reproduces point evaluation: <veronese(l, d), g> = g(l).
template <class S>
Form<S> veronese(const std::vector<S>& ell, int d) {
  if (ell.empty()) throw InputError("veronese needs a non-empty vector");
  if (d < 1) throw InputError("veronese needs d >= 1");
  const int n = static_cast<int>(ell.size());
  MonomialBasis basis(n, d);
  Form<S> f(n, d);
  for (const auto& alpha : basis) {
    S term = multinomial_as<S>(alpha);
    for (std::size_t i = 0; i < ell.size(); ++i)
      for (int p = 0; p < alpha[i]; ++p) term *= ell[i];
    f.add_term(alpha, term);
  }
  return f;
}

/// Partial derivative d/dx_i as a form of degree d-1.
template <class S>
Form<S> partial_derivative(const Form<S>& g, std::size_t i) {
  if (i >= static_cast<std::size_t>(g.n())) throw InputError("derivative index out of range");
  if (g.degree() == 0) return Form<S>(g.n(), 0);
  Form<S> out(g.n(), g.degree() - 1);
  for (const auto& [alpha, c] : g.terms()) {
    if (alpha[i] == 0) continue;
    std::vector<int> e = alpha.exponents();
    e[i] -= 1;
    out.add_term(MultiIndex(std::move(e)), c * S(alpha[i]));
  }
  return out;
}

template <class S>
std::vector<double> gradient(const Form<S>& g, std::span<const double> x) {
  detail::require_dim(x.size(), g.n());
  const std::size_t n = x.size();
  auto table = detail::power_table(x, g.degree());
  std::vector<double> grad(n, 0.0);
  for (const auto& [alpha, c] : g.terms()) {
    const double cd = to_double(c);
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha[i] == 0) continue;
      double term = cd * alpha[i];
      for (std::size_t k = 0; k < n; ++k) term *= table[k][alpha[k] - (k == i ? 1 : 0)];
      grad[i] += term;
    }
  }
  return grad;
}

template <class S>
SymMatrix hessian(const Form<S>& g, std::span<const double> x) {
  detail::require_dim(x.size(), g.n());
  const std::size_t n = x.size();
  auto table = detail::power_table(x, g.degree());
  SymMatrix h(n, n);
  std::vector<int> e(n);
  for (const auto& [alpha, c] : g.terms()) {
    const double cd = to_double(c);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        e = alpha.exponents();
        double factor = e[i];
        e[i] -= 1;
        factor *= e[j];
        e[j] -= 1;
        if (factor == 0.0 || e[i] < 0 || e[j] < 0) continue;
        double term = cd * factor;
        for (std::size_t k = 0; k < n; ++k) term *= table[k][e[k]];
        h(i, j) += term;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) h(i, j) = h(j, i);
  return h;
}

/// Non-homogeneous polynomial, used for dehomogenizations g(y, 1).
template <class S>
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(int vars) : vars_(vars) {}

  int variables() const { return vars_; }
  const std::map<MultiIndex, S>& terms() const { return terms_; }

  Polynomial& add_term(const MultiIndex& alpha, const S& c) {
    if (alpha.size() != static_cast<std::size_t>(vars_)) throw InputError("term has wrong number of variables");
    if (pdform::is_zero(c)) return *this;
    auto [it, inserted] = terms_.emplace(alpha, c);
    if (!inserted) {
      it->second += c;
      if (pdform::is_zero(it->second)) terms_.erase(it);
    }
    return *this;
  }

  /// Total degree; -1 for the zero polynomial.
  int degree() const { return terms_.empty() ? -1 : terms_.rbegin()->first.degree(); }

  template <class T>
  T operator()(std::span<const T> y) const {
    if (y.size() != static_cast<std::size_t>(vars_)) throw InputError("point dimension does not match polynomial");
    T sum(0);
    for (const auto& [alpha, c] : terms_) {
      T term;
      if constexpr (std::is_same_v<T, double>) {
        term = to_double(c);
      } else {
        term = T(c);
      }
      for (std::size_t i = 0; i < y.size(); ++i)
        for (int p = 0; p < alpha[i]; ++p) term *= y[i];
      sum += term;
    }
    return sum;
  }

  /// Coefficients in ascending powers; only for univariate polynomials.
  std::vector<S> univariate_coefficients() const {
    if (vars_ != 1) throw InputError("polynomial is not univariate");
    std::vector<S> c(static_cast<std::size_t>(std::max(degree(), 0)) + 1, S(0));
    for (const auto& [alpha, v] : terms_) c[alpha[0]] = v;
    return c;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.vars_ == b.vars_ && a.terms_ == b.terms_;
  }

 private:
  int vars_ = 0;
  std::map<MultiIndex, S> terms_;
};

/// g(y_1, ..., y_{n-1}, 1). The drop d - deg(result) is the vanishing
/// order of g at the point (., ..., ., 0) direction, i.e. at infinity.
template <class S>
Polynomial<S> dehomogenize(const Form<S>& g) {
  if (g.n() < 2) throw InputError("dehomogenize needs n >= 2");
  Polynomial<S> p(g.n() - 1);
  for (const auto& [alpha, c] : g.terms()) {
    std::vector<int> e(alpha.exponents().begin(), alpha.exponents().end() - 1);
    p.add_term(MultiIndex(std::move(e)), c);
  }
  return p;
}

/// The composition x -> g(a x).
template <class S>
Form<S> change_of_variables(const Form<S>& g, const Matrix<S>& a) {
  const std::size_t n = static_cast<std::size_t>(g.n());
  if (a.rows() != n || a.cols() != n) throw InputError("change of variables matrix has wrong size");
  S det = determinant(a);
  if constexpr (is_exact_v<S>) {
    if (is_zero(det)) throw SingularMatrixError("change of variables matrix is singular");
  } else {
    double scale = std::pow(std::max(1e-300, max_abs_entry(a)), static_cast<double>(n));
    if (std::abs(det) <= 1e-12 * scale) throw SingularMatrixError("change of variables matrix is singular");
  }
  // powers[i][p] = (sum_j a_ij x_j)^p
  std::vector<std::vector<Form<S>>> powers(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<S> row(n);
    for (std::size_t j = 0; j < n; ++j) row[j] = a(i, j);
    Form<S> lin = linear_form(row);
    powers[i].push_back(Form<S>::constant(g.n(), S(1)));
    for (int p = 1; p <= g.degree(); ++p) powers[i].push_back(powers[i].back() * lin);
  }
  Form<S> out(g.n(), g.degree());
  for (const auto& [alpha, c] : g.terms()) {
    Form<S> term = Form<S>::constant(g.n(), c);
    for (std::size_t i = 0; i < n; ++i)
      if (alpha[i] > 0) term = term * powers[i][alpha[i]];
    out += term;
  }
  return out;
}

}  // namespace pdform
