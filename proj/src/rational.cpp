#include "mupir/rational.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mupir {

Int binomial(long n, long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  Int result = 1;
  for (long i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;  // always exact: result is C(n-k+i, i) after this step
  }
  return result;
}

Int int_pow(const Int& base, long exp) {
  if (exp < 0) throw std::invalid_argument("int_pow: negative exponent");
  Int result = 1;
  Int b = base;
  long e = exp;
  while (e > 0) {
    if (e & 1) result *= b;
    b *= b;
    e >>= 1;
  }
  return result;
}

double to_double(const Rat& r) { return r.convert_to<double>(); }

std::string rat_str(const Rat& r) {
  std::ostringstream out;
  out << numerator(r);
  if (denominator(r) != 1) out << "/" << denominator(r);
  return out.str();
}

std::string float_str(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

}  // namespace mupir
