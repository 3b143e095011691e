#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>

#include "causal/errors.hpp"

namespace causal {

// All probabilities are exact rationals; doubles appear only at output
// formatting and in statistical estimates.
using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// Accepts "3/4", integers ("1"), and decimal literals ("0.25"), all parsed
// exactly.  Anything else is a QueryError.
inline Rat parse_rational(std::string_view text) {
  std::string s(text);
  auto fail = [&]() -> BigInt {
    throw QueryError("cannot parse probability '" + s + "'");
  };
  if (s.empty()) fail();
  bool negative = false;
  std::size_t i = 0;
  if (s[0] == '+' || s[0] == '-') {
    negative = s[0] == '-';
    i = 1;
  }
  auto digits = [&](std::size_t from, std::size_t to) -> BigInt {
    if (from == to) return fail();
    BigInt acc = 0;
    for (std::size_t k = from; k < to; ++k) {
      if (s[k] < '0' || s[k] > '9') return fail();
      acc = acc * 10 + (s[k] - '0');
    }
    return acc;
  };
  Rat value;
  auto slash = s.find('/', i);
  auto dot = s.find('.', i);
  if (slash != std::string::npos) {
    BigInt num = digits(i, slash);
    BigInt den = digits(slash + 1, s.size());
    if (den == 0) fail();
    value = Rat(num, den);
  } else if (dot != std::string::npos) {
    BigInt whole = dot > i ? digits(i, dot) : BigInt(0);
    BigInt frac = digits(dot + 1, s.size());
    BigInt scale = 1;
    for (std::size_t k = dot + 1; k < s.size(); ++k) scale *= 10;
    value = Rat(whole) + Rat(frac, scale);
  } else {
    value = Rat(digits(i, s.size()));
  }
  return negative ? -value : value;
}

inline std::string to_fraction_string(const Rat& r) {
  std::ostringstream out;
  out << numerator(r);
  if (denominator(r) != 1) out << '/' << denominator(r);
  return out.str();
}

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

// Fixed-point decimal rendering, exact up to `digits` places, for reports.
inline std::string to_decimal_string(const Rat& r, int digits = 12) {
  BigInt num = numerator(r);
  BigInt den = denominator(r);
  bool neg = num < 0;
  if (neg) num = -num;
  BigInt whole = num / den;
  BigInt rem = num % den;
  std::ostringstream out;
  if (neg) out << '-';
  out << whole;
  if (rem == 0) return out.str();
  out << '.';
  for (int k = 0; k < digits && rem != 0; ++k) {
    rem *= 10;
    out << rem / den;
    rem %= den;
  }
  if (rem != 0) out << "...";
  return out.str();
}

}  // namespace causal
