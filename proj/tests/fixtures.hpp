#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pdform/forms.hpp"
#include "pdform/matrix.hpp"
#include "pdform/scalar.hpp"

namespace fixtures {

using pdform::Form;
using pdform::MultiIndex;
using pdform::Rational;

using Terms = std::vector<std::pair<std::vector<int>, std::string>>;

template <class S = double>
Form<S> form(int n, int d, const Terms& terms) {
  Form<S> f(n, d);
  for (const auto& [alpha, c] : terms) f.add_term(MultiIndex(alpha), pdform::parse_scalar<S>(c));
  return f;
}

template <class S = double>
Form<S> circle() {
  return form<S>(2, 2, {{{2, 0}, "1"}, {{0, 2}, "1"}});
}

template <class S = double>
Form<S> x4_plus_y4() {
  return form<S>(2, 4, {{{4, 0}, "1"}, {{0, 4}, "1"}});
}

template <class S = double>
Form<S> x2y2() {
  return form<S>(2, 4, {{{2, 2}, "1"}});
}

template <class S = double>
Form<S> motzkin() {
  return form<S>(3, 6, {{{4, 2, 0}, "1"}, {{2, 4, 0}, "1"}, {{2, 2, 2}, "-3"}, {{0, 0, 6}, "1"}});
}

/// x_n^{d-2} (x_1^2 + ... + x_{n-1}^2) + (2/d) (x_1^d + ... + x_{n-1}^d).
template <class S = double>
Form<S> round_zero_family(int n, int d) {
  Form<S> f(n, d);
  for (int i = 0; i + 1 < n; ++i) {
    std::vector<int> a(static_cast<std::size_t>(n), 0);
    a[static_cast<std::size_t>(i)] = 2;
    a[static_cast<std::size_t>(n - 1)] = d - 2;
    f.add_term(MultiIndex(a), S(1));
    std::vector<int> b(static_cast<std::size_t>(n), 0);
    b[static_cast<std::size_t>(i)] = d;
    f.add_term(MultiIndex(b), S(2) / S(d));
  }
  return f;
}

inline pdform::Matrix<Rational> rational_matrix(const std::vector<std::vector<std::string>>& rows) {
  pdform::Matrix<Rational> m(rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = pdform::parse_rational(rows[i][j]);
  return m;
}

/// Rotation by the angle with cos = 3/5, sin = 4/5.
inline pdform::Matrix<Rational> pythagorean_rotation(const std::string& c = "3/5", const std::string& s = "4/5") {
  return rational_matrix({{c, "-" + s}, {s, c}});
}

}  // namespace fixtures
