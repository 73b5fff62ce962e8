#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>

#include "pdform/errors.hpp"

namespace pdform {

/// Arbitrary-precision rational used by the exact code paths.
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;

template <class S>
inline constexpr bool is_exact_v = std::is_same_v<S, Rational>;

inline double to_double(double x) { return x; }
inline double to_double(long double x) { return static_cast<double>(x); }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

template <class S>
bool is_zero(const S& x) {
  return x == S(0);
}

template <class S>
S abs_value(const S& x) {
  return x < S(0) ? S(-x) : x;
}

/// Parses a decimal literal exactly: "3", "-0.25", "1.5e-3", "2/7".
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw InputError("malformed number '" + std::string(text) + "'");
  };
  std::size_t pos = 0;
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  std::size_t end = text.size();
  while (end > pos && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  text = text.substr(pos, end - pos);
  if (text.empty()) return fail();

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_rational(text.substr(0, slash));
    Rational den = parse_rational(text.substr(slash + 1));
    if (is_zero(den)) return fail();
    return num / den;
  }

  bool negative = false;
  std::size_t i = 0;
  if (text[i] == '+' || text[i] == '-') {
    negative = text[i] == '-';
    ++i;
  }
  BigInt digits = 0;
  int scale = 0;
  bool any_digit = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      if (seen_point) --scale;
      any_digit = true;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) return fail();
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') return fail();
    ++i;
    bool exp_negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      exp_negative = text[i] == '-';
      ++i;
    }
    if (i == text.size()) return fail();
    int exponent = 0;
    for (; i < text.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) return fail();
      exponent = exponent * 10 + (text[i] - '0');
      if (exponent > 4000) return fail();
    }
    scale += exp_negative ? -exponent : exponent;
  }
  Rational value(digits);
  BigInt ten_power = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::abs(scale)));
  if (scale >= 0) {
    value *= Rational(ten_power);
  } else {
    value /= Rational(ten_power);
  }
  return negative ? Rational(-value) : value;
}

template <class S>
S parse_scalar(std::string_view text) {
  if constexpr (is_exact_v<S>) {
    return parse_rational(text);
  } else {
    return static_cast<S>(to_double(parse_rational(text)));
  }
}

/// Round-trippable text for a double; "p/q" for rationals.
inline std::string format_scalar(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_scalar(const Rational& x) { return x.str(); }

}  // namespace pdform
