#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace cw {

// Exact scalar: arbitrary precision rational, always stored reduced.
using Rat = boost::multiprecision::mpq_rational;

// Float scalar. Complex so that hermitian projector data (Pauli matrices)
// fits in the same templates; purely real data just has zero imaginary part.
using CF = std::complex<double>;

template <class F> struct field_traits;

template <> struct field_traits<Rat> {
  static constexpr bool exact = true;
  static bool is_zero(const Rat& x) { return x.is_zero(); }
  static double abs(const Rat& x) { return std::abs(x.convert_to<double>()); }
  static Rat from_int(long n) { return Rat(n); }
};

template <> struct field_traits<CF> {
  static constexpr bool exact = false;
  static bool is_zero(const CF& x) { return x == CF(0.0, 0.0); }
  static double abs(const CF& x) { return std::abs(x); }
  static CF from_int(long n) { return CF(double(n), 0.0); }
};

template <> struct field_traits<double> {
  static constexpr bool exact = false;
  static bool is_zero(const double& x) { return x == 0.0; }
  static double abs(const double& x) { return std::abs(x); }
  static double from_int(long n) { return double(n); }
};

// "p/q" (or plain "p") parsing for the JSON wire format.
inline Rat parse_rat(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rat(s);
  Rat num(s.substr(0, slash));
  Rat den(s.substr(slash + 1));
  if (den.is_zero()) throw std::invalid_argument("rational with zero denominator: " + s);
  return num / den;
}

inline std::string format_rat(const Rat& x) {
  std::string num = numerator(x).str();
  if (denominator(x) == 1) return num;
  return num + "/" + denominator(x).str();
}

}  // namespace cw
