#include "badw/geometry.hpp"

#include "badw/error.hpp"

namespace badw {

namespace {

Real tol(const Real& scale) { return slack() * (1 + abs(scale)); }

}  // namespace

Real distance(const RVec& a, const RVec& b) {
  Real s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return sqrt(s);
}

bool contains(const Ball& b, const RVec& x) { return distance(b.center, x) <= b.radius + tol(b.radius); }

bool ball_inside(const Ball& inner, const Ball& outer) {
  return distance(inner.center, outer.center) + inner.radius <= outer.radius + tol(outer.radius);
}

bool balls_disjoint(const Ball& a, const Ball& b) {
  return distance(a.center, b.center) >= a.radius + b.radius - tol(a.radius + b.radius);
}

bool ball_avoids(const Ball& b, const HyperplaneNbhd& h) {
  return abs(h.signed_distance(b.center)) >= b.radius + h.width - tol(b.radius + h.width);
}

HyperplaneNbhd hyperplane_at(RVec normal, const RVec& point, const Real& width) {
  Real n = norm(normal);
  require(n > 0, Errc::Degenerate, "zero normal");
  for (auto& a : normal) a /= n;
  Real off = dot(normal, point);
  return {std::move(normal), off, width};
}

}  // namespace badw
