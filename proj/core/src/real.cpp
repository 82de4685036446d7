#include "badw/real.hpp"

#include "badw/error.hpp"

#include <gmp.h>
#include <mpfr.h>

#include <cmath>
#include <cstdlib>
#include <memory>

namespace badw {

namespace {

unsigned g_bits = kDefaultPrecision;

unsigned digits10_for(unsigned bits) {
  // boost maps digits10 -> bits with a little headroom; this keeps us >= bits.
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

struct Init {
  Init() { set_precision(kDefaultPrecision); }
};
const Init g_init;

}  // namespace

std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::InvalidBase: return "InvalidBase";
    case Errc::InvalidShape: return "InvalidShape";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DegreeOverflow: return "DegreeOverflow";
    case Errc::FactorMismatch: return "FactorMismatch";
    case Errc::PrecisionExhausted: return "PrecisionExhausted";
    case Errc::DependentInput: return "DependentInput";
    case Errc::PreconditionViolated: return "PreconditionViolated";
    case Errc::Degenerate: return "Degenerate";
    case Errc::OracleViolation: return "OracleViolation";
    case Errc::IllegalMove: return "IllegalMove";
    case Errc::ExtractionGap: return "ExtractionGap";
    case Errc::NoLegalMove: return "NoLegalMove";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::ParamInfeasible: return "ParamInfeasible";
    case Errc::CertificateFailure: return "CertificateFailure";
  }
  return "Unknown";
}

void set_precision(unsigned bits) {
  require(bits >= 64 && bits <= 1u << 16, Errc::InvalidArgument, "precision out of range");
  g_bits = bits;
  Real::default_precision(digits10_for(bits));
}

unsigned precision() { return g_bits; }

Real at_working(const Real& v) {
  Real out;
  mpfr_set(out.backend().data(), v.backend().data(), MPFR_RNDN);
  return out;
}

unsigned effective_bits() {
  Real x = 0;
  return static_cast<unsigned>(mpfr_get_prec(x.backend().data()));
}

Real slack() { return ldexp(Real(1), -static_cast<int>(g_bits - 32)); }
Real tight_slack() { return ldexp(Real(1), -static_cast<int>(g_bits - 8)); }

PrecisionScope::PrecisionScope(unsigned bits) : saved_(g_bits) { set_precision(bits); }
PrecisionScope::~PrecisionScope() { set_precision(saved_); }

std::string to_decimal(const Real& x) {
  if (x == 0) return "0";
  mpfr_exp_t e = 0;
  char* raw = mpfr_get_str(nullptr, &e, 10, 0, x.backend().data(), MPFR_RNDN);
  std::unique_ptr<char, void (*)(char*)> guard(raw, mpfr_free_str);
  std::string digits(raw);
  std::string sign;
  if (!digits.empty() && digits[0] == '-') {
    sign = "-";
    digits.erase(0, 1);
  }
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
  std::string out = sign + digits.substr(0, 1);
  if (digits.size() > 1) out += "." + digits.substr(1);
  long exp10 = static_cast<long>(e) - 1;
  if (exp10 != 0) out += "e" + std::to_string(exp10);
  return out;
}

Real from_decimal(const std::string& s) {
  Real x;
  int rc = mpfr_set_str(x.backend().data(), s.c_str(), 10, MPFR_RNDN);
  require(rc == 0, Errc::InvalidArgument, "not a decimal number: " + s);
  return x;
}

Real to_real(const Rational& q) {
  return Real(numerator(q)) / Real(denominator(q));
}

Real to_real(const Int& z) { return Real(z); }

Rational parse_rational(const std::string& s) {
  require(!s.empty(), Errc::InvalidArgument, "empty rational");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    Int p(s.substr(0, slash));
    Int q(s.substr(slash + 1));
    require(q != 0, Errc::InvalidArgument, "zero denominator: " + s);
    return Rational(p, q);
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) return Rational(Int(s));
  std::string whole = s.substr(0, dot);
  std::string frac = s.substr(dot + 1);
  bool neg = !whole.empty() && whole[0] == '-';
  if (neg) whole.erase(0, 1);
  if (whole.empty()) whole = "0";
  Int scale = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
  Int num = Int(whole) * scale + (frac.empty() ? Int(0) : Int(frac));
  Rational r(num, scale);
  return neg ? Rational(-r) : r;
}

std::string to_string(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

Real pi() { return boost::math::constants::pi<Real>(); }

Real golden() { return (sqrt(Real(5)) - 1) / 2; }

Int nearest_int(const Real& x) {
  Real r = round(x);
  mpz_t z;
  mpz_init(z);
  mpfr_get_z(z, r.backend().data(), MPFR_RNDN);
  std::unique_ptr<char, void (*)(void*)> txt(mpz_get_str(nullptr, 10, z), std::free);
  mpz_clear(z);
  return Int(txt.get());
}

Real dist_to_z(const Real& x) { return abs(x - round(x)); }

Real norm2(const RVec& v) {
  Real s = 0;
  for (const auto& a : v) s += a * a;
  return s;
}

Real norm(const RVec& v) { return sqrt(norm2(v)); }

Real dot(const RVec& a, const RVec& b) {
  Real s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace badw
