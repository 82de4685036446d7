#pragma once

#include "badw/real.hpp"

#include <string>

namespace badw {

// Closed Euclidean ball; a ball is its (center, radius) pair.
struct Ball {
  RVec center;
  Real radius;

  int dim() const { return static_cast<int>(center.size()); }
};

// B(H, width) for the hyperplane H = {x : <normal, x> = offset}.
struct HyperplaneNbhd {
  RVec normal;  // unit length
  Real offset;
  Real width;

  int dim() const { return static_cast<int>(normal.size()); }
  Real signed_distance(const RVec& x) const { return dot(normal, x) - offset; }
  bool contains(const RVec& x) const { return abs(signed_distance(x)) <= width; }
};

Real distance(const RVec& a, const RVec& b);

// Geometric predicates. Touching within the relative slack counts as
// containment / disjointness; this only matters on measure-zero boundaries.
bool contains(const Ball& b, const RVec& x);
bool ball_inside(const Ball& inner, const Ball& outer);
bool balls_disjoint(const Ball& a, const Ball& b);
bool ball_avoids(const Ball& b, const HyperplaneNbhd& h);

// Normalises `normal` and returns the neighbourhood through `point`.
HyperplaneNbhd hyperplane_at(RVec normal, const RVec& point, const Real& width);

}  // namespace badw
