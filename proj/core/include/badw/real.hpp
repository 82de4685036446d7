#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <string>
#include <vector>

namespace badw {

namespace mp = boost::multiprecision;

// Working scalar. Precision is a process-wide setting (bits), applied to every
// value constructed after the call; see set_precision().
using Real = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;
using Int = mp::cpp_int;
using Rational = mp::cpp_rational;

using RVec = std::vector<Real>;
using QVec = std::vector<Rational>;
using ZVec = std::vector<Int>;

inline constexpr unsigned kDefaultPrecision = 256;

// Sets the working precision to at least `bits` binary digits.
void set_precision(unsigned bits);
// Precision requested by the last set_precision call.
unsigned precision();
// Copy of v rounded to the working precision (plain assignment keeps v's).
Real at_working(const Real& v);
// Bits actually carried by a freshly constructed Real.
unsigned effective_bits();

// Relative slack 2^{-(P-32)} used by every threshold comparison.
Real slack();
// Slack 2^{-(P-8)} used for normalisation invariants (weights, determinants).
Real tight_slack();

// RAII precision switch, restores the previous setting on exit.
class PrecisionScope {
public:
  explicit PrecisionScope(unsigned bits);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
  unsigned saved_;
};

// Shortest decimal string that reads back to the same value at the current
// precision.
std::string to_decimal(const Real& x);
Real from_decimal(const std::string& s);

Real to_real(const Rational& q);
Real to_real(const Int& z);
// Parses "p/q", an integer, or a decimal literal into an exact rational.
Rational parse_rational(const std::string& s);
std::string to_string(const Rational& q);

Real pi();
Real golden();  // (sqrt 5 - 1) / 2

// Nearest integer, ties away from zero.
Int nearest_int(const Real& x);
// Distance to the nearest integer.
Real dist_to_z(const Real& x);

Real norm(const RVec& v);
Real norm2(const RVec& v);
Real dot(const RVec& a, const RVec& b);

}  // namespace badw
