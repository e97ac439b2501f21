#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <cstdint>
#include <sstream>
#include <string>

#include "effmom/error.hpp"

namespace effmom {

using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return static_cast<double>(r); }

// Parse a decimal literal ("2", "-0.25", "1.0e-4") into an exact rational.
inline Rat rat_from_decimal(const std::string& text) {
  std::string s = text;
  bool neg = false;
  std::size_t pos = 0;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    neg = (s[pos] == '-');
    ++pos;
  }
  std::string digits;
  long frac_digits = 0;
  bool seen_dot = false, seen_digit = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      seen_digit = true;
      if (seen_dot) ++frac_digits;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  long expo = 0;
  if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
    ++pos;
    bool eneg = false;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
      eneg = (s[pos] == '-');
      ++pos;
    }
    if (pos >= s.size()) throw MalformedSpec("bad numeric literal: " + text);
    for (; pos < s.size(); ++pos) {
      if (s[pos] < '0' || s[pos] > '9') break;
      expo = expo * 10 + (s[pos] - '0');
    }
    if (eneg) expo = -expo;
  }
  if (!seen_digit || pos != s.size())
    throw MalformedSpec("bad numeric literal: " + text);
  boost::multiprecision::cpp_int num(digits.empty() ? "0" : digits);
  Rat r(num);
  long p10 = expo - frac_digits;
  boost::multiprecision::cpp_int ten(10);
  if (p10 > 0)
    r *= Rat(boost::multiprecision::pow(ten, static_cast<unsigned>(p10)));
  else if (p10 < 0)
    r /= Rat(boost::multiprecision::pow(ten, static_cast<unsigned>(-p10)));
  return neg ? Rat(-r) : r;
}

// Exact complex rational: the coefficient field of every symbolic object.
struct CRat {
  Rat re{0}, im{0};

  CRat() = default;
  CRat(long r) : re(r) {}  // NOLINT: implicit from integers is convenient
  CRat(const Rat& r) : re(r) {}
  CRat(Rat r, Rat i) : re(std::move(r)), im(std::move(i)) {}

  static CRat i() { return CRat(Rat(0), Rat(1)); }

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_real() const { return im == 0; }
  CRat conj() const { return CRat(re, -im); }

  CRat operator-() const { return CRat(-re, -im); }
  CRat& operator+=(const CRat& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  CRat& operator-=(const CRat& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  friend CRat operator+(CRat a, const CRat& b) { return a += b; }
  friend CRat operator-(CRat a, const CRat& b) { return a -= b; }
  friend CRat operator*(const CRat& a, const CRat& b) {
    return CRat(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
  }
  CRat& operator*=(const CRat& o) { return *this = *this * o; }
  friend CRat operator/(const CRat& a, const CRat& b) {
    Rat n = b.re * b.re + b.im * b.im;
    if (n == 0) throw Error("division by zero complex rational");
    return CRat((a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n);
  }
  CRat& operator/=(const CRat& o) { return *this = *this / o; }
  friend bool operator==(const CRat& a, const CRat& b) {
    return a.re == b.re && a.im == b.im;
  }
  friend bool operator!=(const CRat& a, const CRat& b) { return !(a == b); }

  std::complex<double> to_complex() const {
    return {to_double(re), to_double(im)};
  }
};

inline std::string rat_to_string(const Rat& r) {
  std::ostringstream os;
  os << boost::multiprecision::numerator(r);
  if (boost::multiprecision::denominator(r) != 1)
    os << "/" << boost::multiprecision::denominator(r);
  return os.str();
}

// Renders a coefficient for the term dump: "2", "-1/2", "i", "-3/2*i",
// "(1+2*i)". Pure-real and pure-imaginary values stay unparenthesised.
inline std::string crat_to_string(const CRat& c) {
  if (c.im == 0) return rat_to_string(c.re);
  if (c.re == 0) {
    if (c.im == 1) return "i";
    if (c.im == -1) return "-i";
    return rat_to_string(c.im) + "*i";
  }
  std::string s = "(" + rat_to_string(c.re);
  if (c.im > 0) s += "+";
  s += (c.im == 1 ? "i" : c.im == -1 ? "-i" : rat_to_string(c.im) + "*i");
  return s + ")";
}

}  // namespace effmom
