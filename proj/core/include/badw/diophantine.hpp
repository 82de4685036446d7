#pragma once

#include "badw/lattice.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace badw {

struct BadnessReport {
  Real cQ;
  long argmin_q = 0;
  long Q = 0;
};

struct OrbitReport {
  Real minSystole;
  long argmin_n = 0;
  long N = 0;
  std::vector<std::pair<long, Real>> perStep;
};

// a + b sqrt(D) with D > 0 not a perfect square.
struct QuadraticIrrational {
  Rational a;
  Rational b;
  Int D;

  Real value() const;
  static QuadraticIrrational golden();  // (sqrt 5 - 1)/2
};

BadnessReport badness_constant(const RVec& x, const WeightVector& w, long Q);
// Symbolic path: ||q x_i|| evaluated through the conjugate, so no cancellation.
BadnessReport badness_constant(const std::vector<QuadraticIrrational>& x, const WeightVector& w, long Q);

OrbitReport dani_orbit_min(const RVec& x, const WeightVector& w, const Real& b, long N);
OrbitReport dani_orbit_min_log(const RVec& x, const WeightVector& w, const Real& log_b, long N, long n_first = 1);

struct CorrespondenceReport {
  BadnessReport badness;
  OrbitReport orbit;
  bool rational_hit = false;     // cQ == 0 for some q <= Q
  long collapse_after = -1;      // n past which the hit must shrink the orbit
  bool consistent = true;        // qualitative agreement flag
};

CorrespondenceReport correspondence_probe(const RVec& x, const WeightVector& w, const Real& b, long Q, long N);

}  // namespace badw
