#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "pdform/errors.hpp"
#include "pdform/scalar.hpp"

namespace pdform {

/// Dense univariate polynomial over the rationals, coefficients ascending,
/// with no trailing zero coefficients (the zero polynomial is empty).
class UPoly {
 public:
  UPoly() = default;
  explicit UPoly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }
  UPoly(std::initializer_list<Rational> coeffs) : c_(coeffs) { trim(); }

  static UPoly constant(const Rational& a) { return UPoly({a}); }
  static UPoly x() { return UPoly({Rational(0), Rational(1)}); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  bool is_constant() const { return c_.size() <= 1; }
  const std::vector<Rational>& coefficients() const { return c_; }
  Rational operator[](std::size_t i) const { return i < c_.size() ? c_[i] : Rational(0); }
  Rational lead() const { return c_.empty() ? Rational(0) : c_.back(); }

  Rational operator()(const Rational& t) const {
    Rational acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
    return acc;
  }

  int sign_at(const Rational& t) const {
    Rational v = (*this)(t);
    return v > 0 ? 1 : (v < 0 ? -1 : 0);
  }

  /// Sign as t -> +infinity (or -infinity).
  int sign_at_infinity(bool negative) const {
    if (c_.empty()) return 0;
    int s = lead() > 0 ? 1 : -1;
    return (negative && degree() % 2 == 1) ? -s : s;
  }

  UPoly derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<Rational> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * Rational(static_cast<long long>(i));
    return UPoly(std::move(d));
  }

  UPoly monic() const {
    if (c_.empty()) return {};
    UPoly m = *this;
    const Rational l = lead();
    for (auto& a : m.c_) a /= l;
    return m;
  }

  /// Coefficients of p(t + shift), ascending (Taylor coefficients at `shift`).
  std::vector<Rational> shifted(const Rational& shift) const {
    std::vector<Rational> a = c_;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = n - 1; j > i; --j) a[j - 1] += shift * a[j];
    return a;
  }

  friend UPoly operator+(const UPoly& a, const UPoly& b) {
    std::vector<Rational> c(std::max(a.c_.size(), b.c_.size()), Rational(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
    return UPoly(std::move(c));
  }
  friend UPoly operator-(const UPoly& a, const UPoly& b) {
    std::vector<Rational> c(std::max(a.c_.size(), b.c_.size()), Rational(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] -= b.c_[i];
    return UPoly(std::move(c));
  }
  friend UPoly operator*(const UPoly& a, const UPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> c(a.c_.size() + b.c_.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return UPoly(std::move(c));
  }
  friend UPoly operator*(const Rational& s, const UPoly& a) { return UPoly::constant(s) * a; }
  friend bool operator==(const UPoly& a, const UPoly& b) { return a.c_ == b.c_; }

  /// Euclidean division: returns (q, r) with a = q b + r, deg r < deg b.
  friend std::pair<UPoly, UPoly> divmod(const UPoly& a, const UPoly& b) {
    if (b.is_zero()) throw InputError("polynomial division by zero");
    std::vector<Rational> r = a.c_;
    if (a.degree() < b.degree()) return {UPoly{}, a};
    std::vector<Rational> q(static_cast<std::size_t>(a.degree() - b.degree() + 1), Rational(0));
    const Rational lb = b.lead();
    for (int k = a.degree() - b.degree(); k >= 0; --k) {
      const std::size_t top = static_cast<std::size_t>(k + b.degree());
      const Rational f = r[top] / lb;
      q[static_cast<std::size_t>(k)] = f;
      if (pdform::is_zero(f)) continue;
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[static_cast<std::size_t>(k) + j] -= f * b.c_[j];
    }
    return {UPoly(std::move(q)), UPoly(std::move(r))};
  }

 private:
  void trim() {
    while (!c_.empty() && pdform::is_zero(c_.back())) c_.pop_back();
  }
  std::vector<Rational> c_;
};

inline UPoly operator/(const UPoly& a, const UPoly& b) { return divmod(a, b).first; }
inline UPoly operator%(const UPoly& a, const UPoly& b) { return divmod(a, b).second; }

/// Monic greatest common divisor (zero only if both inputs are zero).
inline UPoly gcd(UPoly a, UPoly b) {
  while (!b.is_zero()) {
    UPoly r = a % b;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

/// Square-free factors of a monic polynomial, p = prod_i a_i^i (Yun's
/// algorithm). Returns the pairs (a_i, i) with non-constant monic a_i.
inline std::vector<std::pair<UPoly, int>> squarefree_decomposition(const UPoly& p) {
  if (p.is_zero()) throw InputError("square-free decomposition of the zero polynomial");
  std::vector<std::pair<UPoly, int>> out;
  UPoly f = p.monic();
  if (f.is_constant()) return out;
  UPoly fp = f.derivative();
  UPoly a0 = gcd(f, fp);
  UPoly b = f / a0;
  UPoly c = fp / a0;
  UPoly d = c - b.derivative();
  for (int i = 1; !b.is_constant(); ++i) {
    UPoly a = gcd(b, d);
    b = b / a;
    c = d / a;
    d = c - b.derivative();
    if (!a.is_constant()) out.emplace_back(a.monic(), i);
  }
  return out;
}

/// Sturm sequence p, p', -rem(p, p'), ...
inline std::vector<UPoly> sturm_sequence(const UPoly& p) {
  std::vector<UPoly> seq{p, p.derivative()};
  while (!seq.back().is_zero()) {
    UPoly r = seq[seq.size() - 2] % seq.back();
    if (r.is_zero()) break;
    seq.push_back(UPoly::constant(Rational(-1)) * r);
  }
  if (seq.back().is_zero()) seq.pop_back();
  return seq;
}

namespace detail {

inline int count_sign_changes(const std::vector<int>& signs) {
  int changes = 0;
  int last = 0;
  for (int s : signs) {
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

inline int sign_changes_at(const std::vector<UPoly>& seq, const Rational& t) {
  std::vector<int> s;
  s.reserve(seq.size());
  for (const auto& p : seq) s.push_back(p.sign_at(t));
  return count_sign_changes(s);
}

inline int sign_changes_at_infinity(const std::vector<UPoly>& seq, bool negative) {
  std::vector<int> s;
  s.reserve(seq.size());
  for (const auto& p : seq) s.push_back(p.sign_at_infinity(negative));
  return count_sign_changes(s);
}

}  // namespace detail

/// Number of distinct real roots in (a, b] of the polynomial whose Sturm sequence is given.
inline int count_real_roots(const std::vector<UPoly>& seq, const Rational& a, const Rational& b) {
  return detail::sign_changes_at(seq, a) - detail::sign_changes_at(seq, b);
}

/// Number of distinct real roots on the whole line.
inline int count_real_roots(const UPoly& p) {
  if (p.is_constant()) return 0;
  auto seq = sturm_sequence(p);
  return detail::sign_changes_at_infinity(seq, true) - detail::sign_changes_at_infinity(seq, false);
}

/// 1 + max |a_i / a_n|: every root lies strictly inside (-B, B).
inline Rational cauchy_root_bound(const UPoly& p) {
  if (p.is_constant()) return Rational(1);
  Rational m(0);
  for (int i = 0; i < p.degree(); ++i) {
    Rational r = abs_value(p[static_cast<std::size_t>(i)] / p.lead());
    if (r > m) m = r;
  }
  return m + 1;
}

/// Interval (lo, hi] containing exactly one real root; lo == hi for a root
/// that was hit exactly.
struct RootInterval {
  Rational lo;
  Rational hi;
  bool exact() const { return lo == hi; }
  Rational midpoint() const { return (lo + hi) / 2; }
};

/// Isolating intervals, in increasing order, for the distinct real roots of p.
inline std::vector<RootInterval> isolate_real_roots(const UPoly& p) {
  std::vector<RootInterval> out;
  if (p.is_constant()) return out;
  auto seq = sturm_sequence(p);
  const Rational bound = cauchy_root_bound(p);
  std::vector<std::pair<RootInterval, int>> stack{{{-bound, bound}, count_real_roots(seq, -bound, bound)}};
  while (!stack.empty()) {
    auto [iv, count] = stack.back();
    stack.pop_back();
    if (count == 0) continue;
    if (count == 1) {
      if (p.sign_at(iv.hi) == 0) iv.lo = iv.hi;
      out.push_back(iv);
      continue;
    }
    const Rational mid = iv.midpoint();
    const int left = count_real_roots(seq, iv.lo, mid);
    // push right first so the left half is processed first
    stack.push_back({{mid, iv.hi}, count - left});
    stack.push_back({{iv.lo, mid}, left});
  }
  std::sort(out.begin(), out.end(), [](const RootInterval& a, const RootInterval& b) { return a.hi < b.hi; });
  return out;
}

/// Bisects an isolating interval of a square-free polynomial until its
/// width is at most `width`.
inline RootInterval refine_root(const UPoly& p, RootInterval iv, const Rational& width) {
  if (iv.exact()) return iv;
  // p(lo) may vanish at a neighbouring root; p(hi) cannot.
  const int shi = p.sign_at(iv.hi);
  while (iv.hi - iv.lo > width) {
    const Rational mid = iv.midpoint();
    const int sm = p.sign_at(mid);
    if (sm == 0) return {mid, mid};
    if (sm == shi) {
      iv.hi = mid;
    } else {
      iv.lo = mid;
    }
  }
  return iv;
}

/// Double-precision location of an isolated root.
inline double root_to_double(const UPoly& p, const RootInterval& iv) {
  if (iv.exact()) return to_double(iv.lo);
  Rational scale = abs_value(iv.lo) > abs_value(iv.hi) ? abs_value(iv.lo) : abs_value(iv.hi);
  if (scale < 1) scale = 1;
  const Rational width = scale / Rational(BigInt(1) << 60);
  return to_double(refine_root(p, iv, width).midpoint());
}

}  // namespace pdform
