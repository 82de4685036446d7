#pragma once

#include "badw/geometry.hpp"
#include "badw/linalg.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace badw {

using NodePath = std::vector<std::uint16_t>;

// Stored node of an explicit tree.
struct TreeNode {
  int parent = -1;
  int depth = 0;
  RVec center;
  std::vector<int> children;
};

// Handle used by both storage modes.
struct NodeRef {
  int depth = 0;
  RVec center;
  NodePath path;
  int index = -1;  // explicit mode only
};

// Tree-like measure: every node of depth n is a ball of radius beta^n r0 with
// N pairwise disjoint children inside it; each node at depth n has mass N^{-n}.
// The measure itself is the leaf-counting measure at depth L.
//
// Two storage modes:
//  * explicit: a flat node list (anything, validated at construction);
//  * self-similar: child c of (x, rho) is centred at x + offsets[c] * rho, so any
//    depth is addressable without storing the tree.
class TreeMeasure {
public:
  static TreeMeasure from_nodes(const Real& beta, const Real& r0, int N, std::vector<TreeNode> nodes);
  static TreeMeasure self_similar(const Real& beta, const Real& r0, const RVec& root, std::vector<RVec> offsets,
                                  int depth);

  const Real& beta() const { return beta_; }
  const Real& r0() const { return r0_; }
  int branching() const { return N_; }
  int depth() const { return L_; }
  int dim() const { return d_; }
  bool implicit() const { return implicit_; }
  Real alpha() const;  // -log N / log beta
  Real radius(int depth) const;
  Rational node_mass(int depth) const;
  Ball ball(const NodeRef& n) const { return {n.center, radius(n.depth)}; }

  NodeRef root() const;
  // Empty at depth L.
  std::vector<NodeRef> children(const NodeRef& n) const;
  NodeRef child(const NodeRef& n, int c) const;
  NodeRef at(const NodePath& path) const;
  // The node whose ball is B, found by nearest-child descent (PreconditionViolated
  // when B is not a node ball).
  NodeRef locate(const Ball& B) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<RVec>& offsets() const { return offsets_; }

  // Smallest gap between sibling balls, in units of the parent radius (self-similar),
  // or over the whole tree relative to the parent radius (explicit).
  Real min_sibling_gap() const;

  // Expands a self-similar tree into the explicit node list (depth L).
  TreeMeasure materialize() const;

  // Lets the depth of a self-similar tree be raised or lowered.
  TreeMeasure with_depth(int L) const;

private:
  Real beta_, r0_;
  int N_ = 0, L_ = 0, d_ = 0;
  bool implicit_ = false;
  std::vector<TreeNode> nodes_;
  std::vector<RVec> offsets_;
  RVec root_;
};

// Exact mass of the leaves whose centres lie in the region. `classify` returns
// +1 when the ball lies inside the region, -1 when it misses it, 0 otherwise.
Rational tree_measure_where(const TreeMeasure& mu, const std::function<int(const Ball&)>& classify,
                            const std::function<bool(const RVec&)>& leaf_in);

Rational tree_measure_of_ball(const TreeMeasure& mu, const Ball& B);
Rational tree_measure_of_slab_in_ball(const TreeMeasure& mu, const HyperplaneNbhd& H, const Ball& B);
// mu(B(S, r)).
Rational tree_measure_of_neighbourhood(const TreeMeasure& mu, const std::vector<RVec>& S, const Real& r);

// Random leaf (depth L) below `from`, uniform for the measure.
template <class Rng>
NodeRef random_leaf(const TreeMeasure& mu, NodeRef from, Rng& rng) {
  while (from.depth < mu.depth()) {
    std::uniform_int_distribution<int> pick(0, mu.branching() - 1);
    from = mu.child(from, pick(rng));
  }
  return from;
}

struct AhlforsReport {
  Real empiricalA;
  Real closedFormA;   // max{(2r0/beta)^alpha, M (1/(2 r0 beta))^alpha}
  Real M;             // packing constant 4^d
  long samples = 0;
  bool withinClosedForm = false;
  RVec worstX;
  Real worstR;
};

AhlforsReport verify_ahlfors(const TreeMeasure& mu, long samples, std::uint64_t seed);

struct DecayReport {
  Real closedDelta;   // log(d/(d+1)) / log beta
  Real closedD;       // (2/beta)^delta (d+1)
  Real fittedD;       // smallest D working with the closed-form delta
  Real fittedDelta;   // largest delta working with the closed-form D
  long trials = 0;
  long nontrivial = 0;  // trials with r' < r and positive slab mass
  long violations = 0;  // trials breaking the closed-form bound
};

DecayReport verify_absolute_decay(const TreeMeasure& mu, long trials, std::uint64_t seed);

struct CoverResult {
  std::vector<Ball> balls;           // radius 3r, at packing centres
  std::vector<std::size_t> centres;  // indices into the input set
  std::optional<Real> bound;         // A mu(B(S, r)) / r^alpha when a measure was given
};

// Greedy maximal r-separated packing in input order, then 3r balls.
CoverResult efficient_cover(const std::vector<RVec>& S, const Real& r);
CoverResult efficient_cover(const std::vector<RVec>& S, const Real& r, const TreeMeasure& mu);

// The closed-form Ahlfors constant for the tree.
Real closed_form_ahlfors(const TreeMeasure& mu);

// Unique hyperplane through d points of R^d (width 0); unit normal with its first
// nonzero entry positive.
HyperplaneNbhd hyperplane_through(const std::vector<RVec>& points);
// Hyperplane through 0 < i <= d points (or through `anchor` when there are none),
// completed with the lowest-index coordinate directions that keep the span of rank d-1.
HyperplaneNbhd hyperplane_through_with_fallback(const std::vector<RVec>& points, const RVec& anchor);

// Selection procedure of a hyperplane-diffuse set K.
struct DiffuseOracle {
  int d = 1;
  Real beta0;
  Real r0;
  RVec base;  // a point of K
  std::string name;
  // Returns x' in K with B(x', beta0 r) inside B(x, r) \ B(H, beta0 r), or nothing.
  std::function<std::optional<RVec>(const RVec& x, const Real& r, const HyperplaneNbhd& H, const Real& beta0)> select;
};

// Calls the oracle and validates its answer (OracleViolation otherwise).
RVec diffuse_query(const DiffuseOracle& K, const RVec& x, const Real& r, const HyperplaneNbhd& H);

// K = C^d for the middle-thirds Cantor set C in [0, 1], searched exhaustively on the
// endpoints of the Cantor intervals of length <= beta0 r / 4. beta0 is left unset.
DiffuseOracle cantor_grid_oracle(int d);

// Largest beta0 = (1/3)(4/5)^k passing `trials` random queries, stored in K.
Real discover_beta0(DiffuseOracle& K, long trials, std::uint64_t seed);

struct MeasureBuildLog {
  long containmentChecks = 0;
  long disjointChecks = 0;
  Real betaPrime;
  Real beta;
};

// Tree with N = d+1 from the diffuse selection recursion; beta = beta'/2,
// beta' defaults to beta0/3.
TreeMeasure build_measure_from_diffuse(const DiffuseOracle& K, int L, std::optional<Real> betaPrime = std::nullopt,
                                       MeasureBuildLog* log = nullptr);

// Versioned JSON, decimal strings at full precision.
std::string tree_to_json(const TreeMeasure& mu);
TreeMeasure tree_from_json(const std::string& text);

// Presets.
TreeMeasure middle_thirds_tree(int L);      // beta 1/3, N 2, [0,1]
TreeMeasure dyadic_tree(int L);             // beta 1/2, N 2, [0,1]
TreeMeasure product_disc_tree(int L);       // d 2, beta 1/3, N 4, offsets (+-1,+-1)(2/3)/sqrt2
TreeMeasure triangle_tree(const Real& beta, const Real& r0, int L);  // d 2, N 3, self-similar

}  // namespace badw
