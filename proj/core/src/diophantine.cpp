#include "badw/diophantine.hpp"

#include <boost/multiprecision/integer.hpp>

namespace badw {

namespace {

Real weight_power(long q, const WeightVector& w, int i) { return pow(Real(q), w.w[i]); }

// floor(y * sqrt(D)) for rational y, exactly.
Int floor_mul_sqrt(const Rational& y, const Int& D) {
  // y sqrt(D) = sign(y) sqrt(y^2 D); floor via integer square roots of num^2 D / den^2
  const Int num = numerator(y), den = denominator(y);
  Int N2 = num * num * D;  // (y sqrt D)^2 = N2 / den^2
  Int s = boost::multiprecision::sqrt(N2);  // floor(sqrt(N2))
  // floor(sqrt(N2)/den) for y >= 0
  if (num >= 0) return s / den;
  // y < 0: floor(-sqrt(N2)/den)
  Int ceil_sqrt = (s * s == N2) ? s : s + 1;
  Int q = ceil_sqrt / den;
  if (q * den != ceil_sqrt) ++q;  // ceil(sqrt(N2)/den) when not exact
  // -ceil(t) == floor(-t); when sqrt is exact and divisible this is still right
  return -q;
}

}  // namespace

Real QuadraticIrrational::value() const { return to_real(a) + to_real(b) * sqrt(to_real(D)); }

QuadraticIrrational QuadraticIrrational::golden() { return {Rational(-1, 2), Rational(1, 2), Int(5)}; }

BadnessReport badness_constant(const RVec& x, const WeightVector& w, long Q) {
  require(Q >= 1, Errc::InvalidArgument, "Q must be >= 1");
  require(static_cast<int>(x.size()) == w.d(), Errc::InvalidShape, "x and w differ in dimension");
  BadnessReport r;
  r.Q = Q;
  bool first = true;
  for (long q = 1; q <= Q; ++q) {
    Real worst = 0;
    for (int i = 0; i < w.d(); ++i) {
      Real v = weight_power(q, w, i) * dist_to_z(Real(q) * x[i]);
      if (v > worst) worst = v;
    }
    if (first || worst < r.cQ) {
      r.cQ = worst;
      r.argmin_q = q;
      first = false;
    }
  }
  return r;
}

BadnessReport badness_constant(const std::vector<QuadraticIrrational>& x, const WeightVector& w, long Q) {
  require(Q >= 1, Errc::InvalidArgument, "Q must be >= 1");
  require(static_cast<int>(x.size()) == w.d(), Errc::InvalidShape, "x and w differ in dimension");
  BadnessReport r;
  r.Q = Q;
  bool first = true;
  for (long q = 1; q <= Q; ++q) {
    Real worst = 0;
    for (int i = 0; i < w.d(); ++i) {
      // q x = A + B sqrt(D); nearest integer p from the exact floor.
      const Rational A = x[i].a * q, B = x[i].b * q;
      const Int fl = floor_mul_sqrt(B, x[i].D);  // floor(B sqrt D)
      Rational base = A + Rational(fl);
      // q x lies in [base, base + 1); candidates floor(base) .. floor(base) + 2
      Int lo = numerator(base) / denominator(base);
      if (numerator(base) < 0 && lo * denominator(base) != numerator(base)) --lo;
      Real best = -1;
      for (Int p = lo - 1; p <= lo + 2; ++p) {
        // |A - p + B sqrt D| = |(A-p)^2 - B^2 D| / |A - p - B sqrt D|
        const Rational u = A - Rational(p);
        const Rational norm_val = u * u - B * B * Rational(x[i].D);
        Real den = abs(to_real(u) - to_real(B) * sqrt(to_real(x[i].D)));
        Real dist = den == 0 ? abs(to_real(u) + to_real(B) * sqrt(to_real(x[i].D))) : abs(to_real(norm_val)) / den;
        if (best < 0 || dist < best) best = dist;
      }
      Real v = weight_power(q, w, i) * best;
      if (v > worst) worst = v;
    }
    if (first || worst < r.cQ) {
      r.cQ = worst;
      r.argmin_q = q;
      first = false;
    }
  }
  return r;
}

OrbitReport dani_orbit_min(const RVec& x, const WeightVector& w, const Real& b, long N) {
  if (!(b > 1)) fail(Errc::InvalidBase, "b must exceed 1");
  return dani_orbit_min_log(x, w, log(b), N);
}

OrbitReport dani_orbit_min_log(const RVec& x, const WeightVector& w, const Real& log_b, long N, long n_first) {
  require(N >= n_first, Errc::InvalidArgument, "N must be >= 1");
  require(static_cast<int>(x.size()) == w.d(), Errc::InvalidShape, "x and w differ in dimension");
  OrbitReport r;
  r.N = N;
  // x carries ~P bits; under a_n u_x its error is amplified by b^{n(1 + w_max)}.
  const Real bits_per_step = log_b * (1 + w.max()) / log(Real(2));
  const Real budget = Real(static_cast<long>(precision()) - 32);
  for (long n = n_first; n <= N; ++n) {
    if (Real(n) * bits_per_step > budget)
      fail(Errc::PrecisionExhausted, "orbit step n=" + std::to_string(n) + ": input precision amplified beyond working bits");
    FactoredGroupElement g{make_a_log(n, log_b, w), {x}};
    Real s;
    try {
      s = shortest_vector(Lattice::from_group(g)).norm;
    } catch (const Error& e) {
      if (e.code() == Errc::PrecisionExhausted)
        fail(Errc::PrecisionExhausted, "orbit step n=" + std::to_string(n) + ": " + e.what());
      throw;
    }
    r.perStep.emplace_back(n, s);
    if (r.perStep.size() == 1 || s < r.minSystole) {
      r.minSystole = s;
      r.argmin_n = n;
    }
  }
  return r;
}

CorrespondenceReport correspondence_probe(const RVec& x, const WeightVector& w, const Real& b, long Q, long N) {
  CorrespondenceReport c;
  c.badness = badness_constant(x, w, Q);
  c.orbit = dani_orbit_min(x, w, b, N);
  c.rational_hit = c.badness.cQ <= slack();
  if (c.rational_hit) {
    // The integer vector (-p, q, ..., q) has length about q b^{-w_min n} under a_n.
    const Real q = Real(c.badness.argmin_q);
    const Real n_star = log(q) / (w.min() * log(b));
    c.collapse_after = static_cast<long>(ceil(n_star).convert_to<double>());
    if (N > c.collapse_after) {
      const Real expected = q * sqrt(Real(w.d())) * pow(b, -w.min() * N);
      c.consistent = c.orbit.minSystole <= expected * (1 + slack());
    }
  }
  return c;
}

}  // namespace badw
