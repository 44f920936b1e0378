#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "polymart/errors.hpp"

namespace polymart {

// Arbitrary precision integers and rationals. cpp_rational keeps itself in
// lowest terms with a positive denominator, which is exactly the canonical
// form the rest of the library assumes.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt num(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt den(const Rational& r) { return boost::multiprecision::denominator(r); }

// Canonical text form: "p" when the denominator is 1, "p/q" otherwise.
inline std::string to_string(const Rational& r) { return r.str(); }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// Accepts "p" or "p/q" with optional leading sign, arbitrary magnitude.
Rational parse_rational(const std::string& text);

inline int sign(const Rational& r) { return r.sign(); }

Rational pow(const Rational& base, int exp);

BigInt factorial(unsigned n);

// n!! for nonnegative n with (-1)!! = 0!! = 1.
BigInt double_factorial(int n);

// C(n, k); zero outside 0 <= k <= n.
BigInt binomial(unsigned n, unsigned k);

} // namespace polymart
