#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace mupir {

// Exact arithmetic used by all rate/cost formulas. Floats appear only at the
// reporting boundary.
using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

Int binomial(long n, long k);
Int int_pow(const Int& base, long exp);

double to_double(const Rat& r);

// "p/q" (or just "p" when the denominator is 1).
std::string rat_str(const Rat& r);

// Fixed 12-significant-digit formatting for machine-readable output.
std::string float_str(double x);

}  // namespace mupir
