#include "badw/fractal.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace badw;

namespace {

// Leaf-count oracle straight from the node list.
Rational brute_mass(const TreeMeasure& mu, const Ball& B) {
  long hits = 0, leaves = 0;
  for (const auto& n : mu.nodes()) {
    if (!n.children.empty()) continue;
    ++leaves;
    Real s = 0;
    for (int i = 0; i < mu.dim(); ++i) s += (n.center[i] - B.center[i]) * (n.center[i] - B.center[i]);
    if (s <= B.radius * B.radius) ++hits;
  }
  return Rational(hits, leaves);
}

std::vector<RVec> leaf_centres(const TreeMeasure& mu) {
  std::vector<RVec> out;
  for (const auto& n : mu.nodes())
    if (n.children.empty()) out.push_back(n.center);
  return out;
}

DiffuseOracle cantor(int d) {
  auto K = cantor_grid_oracle(d);
  discover_beta0(K, 200, 7);
  return K;
}

}  // namespace

TEST(Tree, PresetsAndExponent) {
  auto m = middle_thirds_tree(4);
  EXPECT_EQ(m.branching(), 2);
  EXPECT_EQ(m.depth(), 4);
  EXPECT_EQ(m.nodes().size(), 31u);
  EXPECT_LT(abs(m.alpha() - log(Real(2)) / log(Real(3))), slack());
  EXPECT_LT(abs(dyadic_tree(3).alpha() - 1), slack());
  auto p = product_disc_tree(2);
  EXPECT_EQ(p.nodes().size(), 21u);
  EXPECT_LT(abs(p.alpha() - log(Real(4)) / log(Real(3))), slack());
}

TEST(Tree, ConstructionRejectsBadTrees) {
  // overlapping siblings
  EXPECT_THROW(TreeMeasure::self_similar(Real(1) / 3, Real(1), {Real(0)}, {{Real(-1) / 4}, {Real(1) / 4}}, 2), Error);
  // child sticking out of the parent
  EXPECT_THROW(TreeMeasure::self_similar(Real(1) / 3, Real(1), {Real(0)}, {{Real(-1)}, {Real(1)}}, 2), Error);
  std::vector<TreeNode> nodes{{-1, 0, {Real(0)}, {1, 2}}, {0, 1, {Real(-1) / 2}, {}}, {0, 1, {Real("0.1")}, {}}};
  EXPECT_THROW(TreeMeasure::from_nodes(Real(1) / 2, Real(1), 2, nodes), Error);
  nodes[2].center = {Real(1) / 2};
  EXPECT_NO_THROW(TreeMeasure::from_nodes(Real(1) / 2, Real(1), 2, nodes));
}

TEST(Tree, MassOfBalls) {
  auto m = middle_thirds_tree(6);
  EXPECT_EQ(tree_measure_of_ball(m, m.ball(m.root())), Rational(1));
  EXPECT_EQ(tree_measure_of_ball(m, m.ball(m.child(m.root(), 0))), Rational(1, 2));
  // children masses add up to the parent
  Rational s = 0;
  for (const auto& c : m.children(m.child(m.root(), 1))) s += tree_measure_of_ball(m, m.ball(c));
  EXPECT_EQ(s, Rational(1, 2));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    Ball B{{Real(u(rng))}, Real(u(rng) * 0.3)};
    EXPECT_EQ(tree_measure_of_ball(m, B), brute_mass(m, B));
  }
  auto p = product_disc_tree(3);
  for (int t = 0; t < 100; ++t) {
    Ball B{{Real(u(rng)), Real(u(rng))}, Real(u(rng) * 0.4)};
    EXPECT_EQ(tree_measure_of_ball(p, B), brute_mass(p, B));
  }
}

TEST(Tree, SelfSimilarDeepTreeWithoutMaterialising) {
  PrecisionScope p(1100);
  auto t = triangle_tree(ldexp(Real(1), -24), Real(1) / 2, 40);
  EXPECT_EQ(tree_measure_of_ball(t, t.ball(t.root())), Rational(1));
  auto deep = t.at(NodePath(30, 2));
  EXPECT_EQ(tree_measure_of_ball(t, t.ball(deep)), t.node_mass(30));
  EXPECT_GT(t.min_sibling_gap(), Real("0.8"));
  // materialised shallow copy agrees with the implicit one
  auto e = triangle_tree(Real(1) / 4, Real(1) / 2, 3);
  auto m = e.materialize();
  EXPECT_EQ(m.nodes().size(), 40u);
  auto a = e.at({2, 0, 1});
  auto b = m.at({2, 0, 1});
  EXPECT_EQ(a.center, b.center);
}

TEST(Tree, DepthBeyondPrecisionIsReported) {
  auto t = triangle_tree(ldexp(Real(1), -24), Real(1) / 2, 40);
  EXPECT_THROW(t.at(NodePath(20, 0)), Error);
}

TEST(Ahlfors, SingleNode) {
  auto t = middle_thirds_tree(0);
  auto r = verify_ahlfors(t, 5, 1);
  EXPECT_TRUE(r.withinClosedForm);
  EXPECT_EQ(tree_measure_of_ball(t, Ball{t.root().center, t.r0()}), Rational(1));
  EXPECT_GE(r.empiricalA, Real(1));
}

TEST(Ahlfors, MiddleThirdsWithinClosedForm) {
  auto t = middle_thirds_tree(9);
  auto r = verify_ahlfors(t, 1000, 11);
  EXPECT_TRUE(r.withinClosedForm) << r.empiricalA << " vs " << r.closedFormA;
  EXPECT_EQ(r.M, 4);
  const Real a = t.alpha();
  const Real expect = std::max(pow(Real(3), a), 4 * pow(Real(3), a));  // 2 r0 = 1
  EXPECT_LT(abs(r.closedFormA - expect), slack() * expect);
}

TEST(Ahlfors, DyadicAlphaOne) {
  auto t = dyadic_tree(8);
  auto r = verify_ahlfors(t, 500, 5);
  EXPECT_TRUE(r.withinClosedForm);
  EXPECT_LT(abs(r.closedFormA - 8), slack() * 8);  // max{2, 4 * 2}
}

TEST(Hyperplane, Examples) {
  auto h = hyperplane_through({{Real(0), Real(0)}, {Real(1), Real(0)}});
  EXPECT_EQ(h.normal, (RVec{Real(0), Real(1)}));
  EXPECT_EQ(h.offset, 0);
  EXPECT_EQ(h.width, 0);
  auto g = hyperplane_through({{Real(1), Real(0), Real(0)}, {Real(0), Real(1), Real(0)}, {Real(0), Real(0), Real(1)}});
  const Real s = 1 / sqrt(Real(3));
  for (const auto& c : g.normal) EXPECT_LT(abs(c - s), slack());
  EXPECT_LT(abs(g.offset - s), slack());
  EXPECT_THROW(hyperplane_through({{Real(1), Real(2)}, {Real(1), Real(2)}}), Error);
  EXPECT_THROW(
      hyperplane_through({{Real(0), Real(0), Real(0)}, {Real(1), Real(1), Real(1)}, {Real(2), Real(2), Real(2)}}),
      Error);
  // residuals on random points
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  for (int t = 0; t < 50; ++t) {
    std::vector<RVec> pts(4, RVec(4));
    for (auto& p : pts)
      for (auto& c : p) c = Real(n(rng));
    auto H = hyperplane_through(pts);
    EXPECT_LT(abs(norm(H.normal) - 1), slack());
    for (const auto& p : pts) EXPECT_LT(abs(H.signed_distance(p)), slack());
  }
}

TEST(Hyperplane, Fallback) {
  RVec anchor{Real(1), Real(2), Real(3)};
  auto h0 = hyperplane_through_with_fallback({}, anchor);
  // no points: through the anchor, spanned by e_1 and e_2
  EXPECT_EQ(h0.normal, (RVec{Real(0), Real(0), Real(1)}));
  EXPECT_EQ(h0.offset, 3);
  // one point in the plane: through it, spanned by e_1
  auto h1 = hyperplane_through_with_fallback({{Real(2), Real(5)}}, RVec{Real(0), Real(0)});
  EXPECT_EQ(h1.normal, (RVec{Real(0), Real(1)}));
  EXPECT_EQ(h1.offset, 5);
  // two points in R^3 along e_1: the e_1 fallback is skipped, e_2 completes the span
  auto h2 = hyperplane_through_with_fallback({{Real(0), Real(0), Real(0)}, {Real(1), Real(0), Real(0)}}, anchor);
  EXPECT_EQ(h2.normal, (RVec{Real(0), Real(0), Real(1)}));
  // d = 1: the hyperplane is the point itself
  auto p = hyperplane_through_with_fallback({{Real(3)}}, RVec{Real(0)});
  EXPECT_EQ(p.normal, RVec{Real(1)});
  EXPECT_EQ(p.offset, 3);
}

TEST(Cover, SinglePointAndLeaves) {
  auto one = efficient_cover({{Real(1), Real(1)}}, Real("0.1"));
  ASSERT_EQ(one.balls.size(), 1u);
  EXPECT_EQ(one.balls[0].radius, Real("0.3"));
  auto m = middle_thirds_tree(3);
  auto S = leaf_centres(m);
  auto c = efficient_cover(S, m.radius(3), m);
  EXPECT_EQ(c.balls.size(), 8u);
  for (const auto& x : S) {
    bool in = false;
    for (const auto& b : c.balls) in = in || contains(b, x);
    EXPECT_TRUE(in);
  }
  ASSERT_TRUE(c.bound.has_value());
  EXPECT_LE(Real(c.balls.size()), *c.bound);
}

TEST(Cover, RandomSetsRespectBound) {
  auto m = middle_thirds_tree(8);
  auto leaves = leaf_centres(m);
  std::mt19937_64 rng(21);
  for (int t = 0; t < 100; ++t) {
    std::vector<RVec> S;
    std::bernoulli_distribution keep(0.1 + 0.8 * (t % 5) / 5.0);
    for (const auto& x : leaves)
      if (keep(rng)) S.push_back(x);
    if (S.empty()) S.push_back(leaves[t % leaves.size()]);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Real r = m.radius(8) * pow(Real(3), Real(u(rng) * 7));
    auto c = efficient_cover(S, r, m);
    EXPECT_LE(Real(c.balls.size()), *c.bound) << "trial " << t;
    for (const auto& x : S) {
      bool in = false;
      for (const auto& b : c.balls) in = in || contains(b, x);
      ASSERT_TRUE(in);
    }
    // packing centres are pairwise more than 2r apart
    for (std::size_t a = 0; a < c.centres.size(); ++a)
      for (std::size_t b = 0; b < a; ++b) EXPECT_GT(distance(S[c.centres[a]], S[c.centres[b]]), 2 * r);
  }
}

TEST(Diffuse, OracleValidatesContainment) {
  auto K = cantor(1);
  EXPECT_GT(K.beta0, 0);
  EXPECT_LT(K.beta0, Real(1) / 3);
  // blocking the middle of [0, 1/3]: the answer lies in K and avoids the block
  HyperplaneNbhd H{{Real(1)}, Real(1) / 6, Real(0)};
  RVec x = diffuse_query(K, {Real(1) / 6}, Real(1) / 6, H);
  EXPECT_GE(abs(x[0] - Real(1) / 6), 2 * K.beta0 / 6);
  // a lying oracle is caught
  DiffuseOracle bad = K;
  bad.select = [](const RVec& x, const Real&, const HyperplaneNbhd&, const Real&) { return std::optional<RVec>(x); };
  EXPECT_THROW(diffuse_query(bad, {Real(0)}, Real("0.1"), HyperplaneNbhd{{Real(1)}, Real(0), Real(0)}), Error);
}

TEST(Diffuse, BinaryTreeFromCantorSet) {
  auto K = cantor(1);
  MeasureBuildLog log;
  auto mu = build_measure_from_diffuse(K, 5, std::nullopt, &log);
  EXPECT_EQ(mu.branching(), 2);
  EXPECT_EQ(mu.nodes().size(), 63u);
  EXPECT_EQ(log.containmentChecks, 31 * 2);
  EXPECT_EQ(log.beta, K.beta0 / 6);
  // separation between distinct balls of the same generation
  for (int n = 1; n <= 5; ++n) {
    std::vector<RVec> gen;
    for (const auto& v : mu.nodes())
      if (v.depth == n) gen.push_back(v.center);
    const Real rn = mu.radius(n);
    const Real need = 2 * (K.beta0 - mu.beta()) * mu.radius(n - 1);
    for (std::size_t a = 0; a < gen.size(); ++a)
      for (std::size_t b = 0; b < a; ++b) EXPECT_GE(distance(gen[a], gen[b]) - 2 * rn, need * (1 - slack()));
  }
}

TEST(Diffuse, DepthOneIsGeneralPosition) {
  auto K = cantor(2);
  auto mu = build_measure_from_diffuse(K, 1);
  ASSERT_EQ(mu.nodes().size(), 4u);
  std::vector<RVec> pts;
  for (int c : mu.nodes()[0].children) pts.push_back(mu.nodes()[c].center);
  auto H = hyperplane_through({pts[0], pts[1]});
  EXPECT_GT(abs(H.signed_distance(pts[2])), 0);
}

TEST(Decay, BuiltMeasureMeetsClosedForm) {
  auto K = cantor(1);
  auto mu = build_measure_from_diffuse(K, 6);
  auto r = verify_absolute_decay(mu, 1000, 17);
  EXPECT_LT(abs(r.closedDelta - log(Real(1) / 2) / log(mu.beta())), slack());
  EXPECT_EQ(r.violations, 0);
  EXPECT_GT(r.nontrivial, 0);
  EXPECT_GE(r.fittedDelta, r.closedDelta * (1 - Real("1e-6")));
  EXPECT_LE(r.fittedD, r.closedD * (1 + slack()));
}

TEST(Decay, TriangleTree) {
  auto t = triangle_tree(Real(1) / 8, Real(1) / 2, 6);
  auto r = verify_absolute_decay(t, 400, 23);
  EXPECT_EQ(r.violations, 0);
}

TEST(Serialisation, RoundTripIsExact) {
  auto K = cantor(2);
  auto mu = build_measure_from_diffuse(K, 2);
  auto text = tree_to_json(mu);
  auto back = tree_from_json(text);
  EXPECT_EQ(tree_to_json(back), text);
  ASSERT_EQ(back.nodes().size(), mu.nodes().size());
  for (std::size_t i = 0; i < mu.nodes().size(); ++i) EXPECT_EQ(back.nodes()[i].center, mu.nodes()[i].center);
  EXPECT_EQ(back.beta(), mu.beta());

  PrecisionScope p(800);
  auto t = triangle_tree(ldexp(Real(1), -24), Real(1) / 2, 30);
  auto tb = tree_from_json(tree_to_json(t));
  EXPECT_TRUE(tb.implicit());
  EXPECT_EQ(tb.at(NodePath(20, 1)).center, t.at(NodePath(20, 1)).center);
  EXPECT_THROW(tree_from_json("{\"format\":\"other\"}"), Error);
  EXPECT_THROW(tree_from_json("not json"), Error);
}
