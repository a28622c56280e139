#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace npb {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

inline double rat_to_double(const Rat& r) { return r.convert_to<double>(); }

// gcd of two rationals: gcd of numerators over lcm of denominators.
// gcd(0,0) = 0.
inline Rat rat_gcd(const Rat& a, const Rat& b) {
    Int gn = gcd(numerator(a), numerator(b));
    Int gd = lcm(denominator(a), denominator(b));
    return Rat(gn, gd);
}

} // namespace npb
